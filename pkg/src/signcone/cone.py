"""Homogeneous polyhedral cones in coordinate space and their extreme rays.

A cone is ``{z : h.z <= 0 for halfspaces, h.z = 0 for hyperplanes}``.  For a
pointed cone the extreme rays are maintained with an incremental double
description step; ``brute_force_rays`` enumerates them from scratch and is used
as an independent check.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from signcone.errors import DimensionMismatch, NotPointedInput, OracleTooLarge, TooFewRays, ValidationError

TOL = 1e-9
RANK_TOL = 1e-9
DEDUP_TOL = 1e-9
TIE_DECIMALS = 12
ORACLE_MAX_SUBSETS = 2_000_000

HALFSPACE = "halfspace"
HYPERPLANE = "hyperplane"

POINTED = "pointed"
NOT_POINTED = "not-pointed"
TRIVIAL = "trivial"


@dataclass(frozen=True)
class Constraint:
    normal: np.ndarray = field(repr=False)
    kind: str = HALFSPACE
    label: int = -1

    def __post_init__(self):
        h = np.array(self.normal, dtype=float).ravel()
        norm = np.linalg.norm(h)
        if not norm > 1e-12:
            raise ValidationError("constraint normal is (numerically) zero")
        if self.kind not in (HALFSPACE, HYPERPLANE):
            raise ValidationError(f"unknown constraint kind {self.kind!r}")
        h = h / norm
        h.setflags(write=False)
        object.__setattr__(self, "normal", h)


@dataclass(frozen=True)
class ExtremeRay:
    direction: np.ndarray
    active_set: tuple[int, ...]


@dataclass(frozen=True)
class Cone:
    dim: int
    constraints: tuple[Constraint, ...]
    rays: tuple[ExtremeRay, ...]
    status: str

    def ray_matrix(self) -> np.ndarray:
        """Rays stacked as rows (``len(rays) x dim``)."""
        if not self.rays:
            return np.zeros((0, self.dim))
        return np.array([r.direction for r in self.rays])

    def normals(self) -> np.ndarray:
        return _normals(self.dim, self.constraints)


def _normals(dim, constraints) -> np.ndarray:
    if not constraints:
        return np.zeros((0, dim))
    return np.array([c.normal for c in constraints])


def _rank(M: np.ndarray) -> int:
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.count_nonzero(s > RANK_TOL))


def _unit(z: np.ndarray) -> np.ndarray:
    z = z / np.linalg.norm(z)
    z.setflags(write=False)
    return z


def _active(H: np.ndarray, z: np.ndarray, indices) -> tuple[int, ...]:
    return tuple(int(i) for i in indices if abs(H[i] @ z) <= TOL)


def is_feasible(constraints, z, tol: float = TOL) -> bool:
    for c in constraints:
        v = float(c.normal @ z)
        if v > tol or (c.kind == HYPERPLANE and v < -tol):
            return False
    return True


def _sorted_rays(rays) -> tuple[ExtremeRay, ...]:
    rays = sorted(rays, key=lambda r: (r.active_set, tuple(np.round(r.direction, TIE_DECIMALS))))
    kept: list[ExtremeRay] = []
    for r in rays:
        if all(float(r.direction @ k.direction) < 1 - DEDUP_TOL for k in kept):
            kept.append(r)
    return tuple(kept)


def _check_dim(dim, constraints):
    for c in constraints:
        if c.normal.shape != (dim,):
            raise DimensionMismatch(f"constraint normal has length {len(c.normal)}, cone dimension is {dim}")


def _dd_step(rays, H, added, k, dim, hyperplane) -> list[ExtremeRay]:
    """Intersect the cone generated by ``rays`` with constraint row ``k`` of ``H``.

    ``added`` lists the constraint indices already imposed; active sets are
    tracked over ``added + [k]`` only.
    """
    h = H[k]
    vals = np.array([h @ r.direction for r in rays])
    neg = [i for i, v in enumerate(vals) if v < -TOL]
    pos = [i for i, v in enumerate(vals) if v > TOL]
    zero = [i for i, v in enumerate(vals) if -TOL <= v <= TOL]
    scope = list(added) + [k]

    out = [ExtremeRay(rays[i].direction, tuple(sorted(set(rays[i].active_set) | {k}))) for i in zero]
    if not hyperplane:
        out += [rays[i] for i in neg]

    for i in neg:
        ai = set(rays[i].active_set)
        for j in pos:
            shared = ai.intersection(rays[j].active_set)
            if len(shared) < dim - 2:
                continue
            if _rank(H[sorted(shared)]) != dim - 2:
                continue
            z = vals[j] * rays[i].direction - vals[i] * rays[j].direction
            z = _unit(z)
            out.append(ExtremeRay(z, _active(H, z, scope)))
    return out


def _build(dim, constraints, rays, status) -> Cone:
    if status == POINTED:
        rays = _sorted_rays(rays)
        if not rays:
            status = TRIVIAL
    else:
        rays = ()
    return Cone(dim=dim, constraints=tuple(constraints), rays=tuple(rays), status=status)


def cone_from_constraints(dim: int, constraints) -> Cone:
    """Cone of ``constraints`` with its extreme rays when it is pointed."""
    constraints = list(constraints)
    _check_dim(dim, constraints)
    H = _normals(dim, constraints)
    if _rank(H) < dim:
        return _build(dim, constraints, (), NOT_POINTED)

    # simplicial start from the first linearly independent constraints
    basis: list[int] = []
    for i in range(len(constraints)):
        if _rank(H[basis + [i]]) == len(basis) + 1:
            basis.append(i)
            if len(basis) == dim:
                break
    R = -np.linalg.inv(H[basis])
    rays = []
    for col in range(dim):
        z = _unit(R[:, col].copy())
        rays.append(ExtremeRay(z, _active(H, z, basis)))
    added = list(basis)
    for i in basis:
        if constraints[i].kind == HYPERPLANE:
            rays = _dd_step(rays, H, [a for a in added if a != i], i, dim, hyperplane=True)
    for i in range(len(constraints)):
        if i in basis:
            continue
        rays = _dd_step(rays, H, added, i, dim, hyperplane=constraints[i].kind == HYPERPLANE)
        added.append(i)
        if not rays:
            break
    return _build(dim, constraints, rays, POINTED)


def cone_add_constraint(c: Cone, k: Constraint) -> Cone:
    """Cone of ``c`` intersected with ``k`` (one double description step)."""
    if c.status == NOT_POINTED:
        raise NotPointedInput("cannot update rays of a cone that is not pointed")
    _check_dim(c.dim, [k])
    constraints = list(c.constraints) + [k]
    if c.status == TRIVIAL:
        return _build(c.dim, constraints, (), TRIVIAL)
    H = _normals(c.dim, constraints)
    idx = len(constraints) - 1
    rays = _dd_step(list(c.rays), H, range(idx), idx, c.dim, hyperplane=k.kind == HYPERPLANE)
    return _build(c.dim, constraints, rays, POINTED)


def brute_force_rays(dim: int, constraints) -> list[ExtremeRay]:
    """Extreme rays by enumerating every (dim-1)-subset of constraints.

    Each rank-(dim-1) subset fixes a line; both of its directions are kept if
    feasible.  Only meaningful for pointed cones.
    """
    constraints = list(constraints)
    _check_dim(dim, constraints)
    m = len(constraints)
    if math.comb(m, dim - 1) > ORACLE_MAX_SUBSETS:
        raise OracleTooLarge(f"C({m}, {dim - 1}) subsets exceeds oracle limit")
    H = _normals(dim, constraints)
    found = []
    for subset in itertools.combinations(range(m), dim - 1):
        if dim == 1:
            line = np.ones(1)
        else:
            sub = H[list(subset)]
            _, s, vt = np.linalg.svd(sub)
            if np.count_nonzero(s > RANK_TOL) != dim - 1:
                continue
            line = vt[-1]
        for sgn in (1.0, -1.0):
            z = _unit(sgn * line)
            if is_feasible(constraints, z):
                found.append(ExtremeRay(z, _active(H, z, range(m))))
    return list(_sorted_rays(found))


def _require_pointed(c: Cone):
    if c.status == NOT_POINTED:
        raise NotPointedInput("operation needs a pointed cone")


def ranked_pairs(c: Cone) -> list[tuple[float, int, int]]:
    """Unordered ray pairs ``(cosine, i, j)``, widest angle first.

    Cosines equal to 12 decimals are tied and ordered by the rays' active sets.
    """
    _require_pointed(c)
    Z = c.ray_matrix()
    G = Z @ Z.T
    pairs = [(float(G[i, j]), i, j) for i, j in itertools.combinations(range(len(c.rays)), 2)]
    pairs.sort(key=lambda p: (round(p[0], TIE_DECIMALS), c.rays[p[1]].active_set, c.rays[p[2]].active_set))
    return pairs


def theta(c: Cone) -> float:
    """Smallest pairwise cosine among the cone's unit extreme rays (+1 if fewer than two)."""
    _require_pointed(c)
    if len(c.rays) < 2:
        return 1.0
    Z = c.ray_matrix()
    G = Z @ Z.T
    iu = np.triu_indices(len(Z), k=1)
    return float(np.clip(G[iu].min(), -1.0, 1.0))


def region_theta(c: Cone) -> float:
    """``theta`` extended to every status.

    A cone containing a line spans a straight angle, so it scores -1; the
    trivial cone scores +1.
    """
    if c.status == NOT_POINTED:
        return -1.0
    return theta(c)


def widest_pair(c: Cone) -> tuple[ExtremeRay, ExtremeRay]:
    _require_pointed(c)
    if len(c.rays) < 2:
        raise TooFewRays(f"cone has {len(c.rays)} rays, need two")
    _, i, j = ranked_pairs(c)[0]
    return c.rays[i], c.rays[j]


def hyperplane_balance(c: Cone, h, pair=None) -> tuple[float, float, bool]:
    """Summed distances of the rays on each side of the hyperplane ``h.z = 0``.

    Returns ``(d_neg, d_pos, separates)`` where ``separates`` says whether
    ``pair`` (default: the widest pair) lies strictly on opposite sides.
    """
    _require_pointed(c)
    h = np.asarray(h, dtype=float)
    h = h / np.linalg.norm(h)
    vals = c.ray_matrix() @ h
    d_neg = float(-vals[vals < -TOL].sum())
    d_pos = float(vals[vals > TOL].sum())
    if pair is None:
        pair = widest_pair(c) if len(c.rays) >= 2 else None
    separates = False
    if pair is not None:
        separates = bool((h @ pair[0].direction) * (h @ pair[1].direction) < 0)
    return d_neg, d_pos, separates


def cone_to_json(c: Cone) -> dict:
    return {
        "dim": c.dim,
        "status": c.status,
        "constraints": [
            {"normal": con.normal.tolist(), "kind": con.kind, "label": con.label} for con in c.constraints
        ],
        "rays": [{"direction": r.direction.tolist(), "active_set": list(r.active_set)} for r in c.rays],
    }


def dump_cone(c: Cone, path) -> None:
    with open(path, "w") as fh:
        json.dump(cone_to_json(c), fh, indent=1)
