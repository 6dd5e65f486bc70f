"""Sign acquisition and sampling-set design (random baseline and greedy cone shrinking)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from signcone.cone import (
    HALFSPACE,
    HYPERPLANE,
    POINTED,
    TOL,
    TRIVIAL,
    Cone,
    Constraint,
    ExtremeRay,
    cone_add_constraint,
    cone_from_constraints,
    ranked_pairs,
    region_theta,
    widest_pair,
)
from signcone.errors import (
    BudgetTooLarge,
    BudgetTooSmall,
    ConeCollapsed,
    DuplicateVertex,
    InvalidVertex,
    NoUnsampledVertex,
    NotPointedInput,
    ValidationError,
)
from signcone.spectral import BandBasis

SIGN_EPS = 1e-12
ZERO_ROW = 1e-12


def sign(v: float, eps: float = SIGN_EPS) -> int:
    if v > eps:
        return 1
    if v < -eps:
        return -1
    return 0


def sign_vector(x, eps: float = SIGN_EPS) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.where(x > eps, 1, np.where(x < -eps, -1, 0)).astype(int)


class SignOracle:
    """Answers sign queries about a hidden signal and counts them."""

    def __init__(self, x, eps: float = SIGN_EPS):
        self._x = np.array(x, dtype=float)
        self._eps = eps
        self.queries = 0
        self.log: list[int] = []

    @property
    def n(self) -> int:
        return len(self._x)

    def query(self, j: int) -> int:
        if not 0 <= j < len(self._x):
            raise InvalidVertex(f"vertex {j} outside [0, {len(self._x)})")
        self.queries += 1
        self.log.append(int(j))
        return sign(self._x[j], self._eps)


@dataclass(frozen=True)
class SignSampleSet:
    order: tuple[int, ...]
    signs: tuple[int, ...]
    n: int

    def __post_init__(self):
        order = tuple(int(v) for v in self.order)
        signs = tuple(int(s) for s in self.signs)
        if len(order) != len(signs):
            raise ValidationError(f"{len(order)} vertices but {len(signs)} signs")
        for v in order:
            if not 0 <= v < self.n:
                raise InvalidVertex(f"vertex {v} outside [0, {self.n})")
        if len(set(order)) != len(order):
            raise DuplicateVertex("sampled vertices must be distinct")
        if any(s not in (-1, 0, 1) for s in signs):
            raise ValidationError("signs must be -1, 0 or +1")
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "signs", signs)

    def __len__(self) -> int:
        return len(self.order)

    def prefix(self, m: int) -> "SignSampleSet":
        return SignSampleSet(self.order[:m], self.signs[:m], self.n)

    def dense(self) -> tuple[np.ndarray, np.ndarray]:
        """``(mask, target)``: boolean sampled mask and per-vertex sign (0 where unsampled)."""
        mask = np.zeros(self.n, dtype=bool)
        target = np.zeros(self.n, dtype=int)
        mask[list(self.order)] = True
        target[list(self.order)] = self.signs
        return mask, target


def sign_sample(x, vertices) -> SignSampleSet:
    x = np.asarray(x, dtype=float)
    vertices = [int(v) for v in vertices]
    for v in vertices:
        if not 0 <= v < len(x):
            raise InvalidVertex(f"vertex {v} outside [0, {len(x)})")
    return SignSampleSet(tuple(vertices), tuple(sign(x[v]) for v in vertices), len(x))


def sample_constraint(basis: BandBasis, j: int, sigma: int) -> Constraint | None:
    """Coordinate-space constraint ``h.a <= 0`` (or ``= 0``) implied by ``sign(x_j) = sigma``.

    Returns None for a vertex whose band row vanishes, since its sign carries no
    information about the coordinates.
    """
    row = basis.matrix[j]
    if np.linalg.norm(row) <= ZERO_ROW:
        return None
    if sigma == 0:
        return Constraint(row, HYPERPLANE, j)
    return Constraint(-sigma * row, HALFSPACE, j)


def seed_by_row_norms(basis: BandBasis, count: int) -> list[int]:
    if count > basis.n:
        raise BudgetTooLarge(f"cannot seed {count} vertices on {basis.n}")
    norms = np.linalg.norm(basis.matrix, axis=1)
    order = sorted(range(basis.n), key=lambda i: (-norms[i], i))
    return order[:count]


def random_sample(n: int, M: int, seed: int) -> list[int]:
    if M > n:
        raise BudgetTooLarge(f"budget {M} exceeds {n} vertices")
    if M < 0:
        raise ValidationError("budget must be non-negative")
    rng = np.random.default_rng(seed)
    return [int(v) for v in rng.choice(n, size=M, replace=False)]


@dataclass
class GreedyState:
    basis: BandBasis
    cone: Cone
    sample_set: SignSampleSet
    widest: tuple[ExtremeRay, ExtremeRay] | None = None
    history: list[str] = field(default_factory=list)  # how each pick was made

    @property
    def sampled(self) -> set[int]:
        return set(self.sample_set.order)


def _with_sample(state: GreedyState, j: int, sigma: int, cone: Cone, how: str) -> GreedyState:
    s = state.sample_set
    widest = widest_pair(cone) if cone.status == POINTED and len(cone.rays) >= 2 else None
    return GreedyState(
        basis=state.basis,
        cone=cone,
        sample_set=SignSampleSet(s.order + (j,), s.signs + (sigma,), s.n),
        widest=widest,
        history=state.history + [how],
    )


def hypothesis_scores(basis: BandBasis, constraints, j: int) -> tuple[float, float, float]:
    """``(theta_pos, theta_neg, theta_zero)`` for the cones obtained by assuming each sign at ``j``."""
    scores = []
    for sigma in (1, -1, 0):
        k = sample_constraint(basis, j, sigma)
        cons = list(constraints) + ([k] if k is not None else [])
        scores.append(region_theta(cone_from_constraints(basis.B, cons)))
    return tuple(scores)


def select_bth_sample(state: GreedyState) -> tuple[int, float]:
    """Max-min pick of the B-th vertex; returns ``(vertex, score)``.

    Each candidate is scored by the worst (smallest) theta over its three sign
    hypotheses.  Scoring never queries the oracle.
    """
    candidates = [i for i in range(state.basis.n) if i not in state.sampled]
    if not candidates:
        raise NoUnsampledVertex("every vertex is already sampled")
    best, best_score = None, -np.inf
    for i in candidates:
        score = min(hypothesis_scores(state.basis, state.cone.constraints, i))
        if score > best_score:
            best, best_score = i, score
    return best, float(best_score)


def _balance_table(state: GreedyState, candidates):
    """Ray-by-candidate hyperplane values and each candidate's balance gap.

    Same quantities as :func:`hyperplane_balance`, computed for all candidates at once.
    """
    ids = [i for i in candidates if np.linalg.norm(state.basis.matrix[i]) > ZERO_ROW]
    H = state.basis.matrix[ids]
    H = H / np.linalg.norm(H, axis=1, keepdims=True)
    V = state.cone.ray_matrix() @ H.T
    d_neg = np.where(V < -TOL, -V, 0.0).sum(axis=0)
    d_pos = np.where(V > TOL, V, 0.0).sum(axis=0)
    return ids, V, np.abs(d_neg - d_pos)


def _argmin_first(gaps: np.ndarray, allowed: np.ndarray) -> int | None:
    if not allowed.any():
        return None
    masked = np.where(allowed, gaps, np.inf)
    return int(np.flatnonzero(masked == masked.min())[0])


def select_next_sample(state: GreedyState) -> tuple[int, str]:
    """Balance pick among vertices whose hyperplane separates the widest ray pair.

    If none separates that pair, narrower pairs are tried in order of
    decreasing angle, then separation is dropped altogether.
    """
    candidates = [i for i in range(state.basis.n) if i not in state.sampled]
    if not candidates:
        raise NoUnsampledVertex("every vertex is already sampled")
    ids, V, gaps = _balance_table(state, candidates)
    if not ids:
        return candidates[0], "uninformative"
    if len(state.cone.rays) >= 2:
        for rank, (_, a, b) in enumerate(ranked_pairs(state.cone)):
            pick = _argmin_first(gaps, V[a] * V[b] < 0)
            if pick is not None:
                return ids[pick], "balance" if rank == 0 else f"balance-pair{rank}"
    return ids[_argmin_first(gaps, np.ones(len(ids), dtype=bool))], "balance-unseparated"


def greedy_sample(
    basis: BandBasis,
    M: int,
    oracle: SignOracle,
    on_step: Callable[[GreedyState], None] | None = None,
) -> tuple[SignSampleSet, GreedyState]:
    """Greedy cone-shrinking sampling set of size ``M``.

    ``on_step`` is called with the state after every acquired sample.
    """
    B, n = basis.B, basis.n
    if M < B:
        raise BudgetTooSmall(f"budget {M} is below the bandwidth {B}")
    if M > n:
        raise BudgetTooLarge(f"budget {M} exceeds {n} vertices")

    constraints: list[Constraint] = []
    state = GreedyState(basis, cone_from_constraints(B, []), SignSampleSet((), (), n))
    for j in seed_by_row_norms(basis, B - 1):
        sigma = oracle.query(j)
        k = sample_constraint(basis, j, sigma)
        if k is not None:
            constraints.append(k)
        cone = cone_from_constraints(B, constraints)
        state = _with_sample(state, j, sigma, cone, "row-norm")
        if on_step:
            on_step(state)

    j, _ = select_bth_sample(state)
    sigma = oracle.query(j)
    k = sample_constraint(basis, j, sigma)
    if k is not None:
        constraints.append(k)
    cone = cone_from_constraints(B, constraints)
    if cone.status == TRIVIAL:
        raise ConeCollapsed("feasible cone collapsed to the origin; oracle signs are inconsistent")
    if cone.status != POINTED:
        raise NotPointedInput(
            f"cone is not pointed after {B} samples; the seed rows of U_B are rank deficient"
        )
    state = _with_sample(state, j, sigma, cone, "max-min")
    if on_step:
        on_step(state)

    while len(state.sample_set) < M:
        j, how = select_next_sample(state)
        sigma = oracle.query(j)
        k = sample_constraint(basis, j, sigma)
        cone = cone_add_constraint(state.cone, k) if k is not None else state.cone
        if cone.status == TRIVIAL:
            raise ConeCollapsed("feasible cone collapsed to the origin; oracle signs are inconsistent")
        state = _with_sample(state, j, sigma, cone, how)
        if on_step:
            on_step(state)
    return state.sample_set, state


def full_sample(x) -> SignSampleSet:
    return sign_sample(x, range(len(np.asarray(x))))


def samples_to_json(s: SignSampleSet, strategy: str, seed: int | None = None) -> dict:
    return {"order": list(s.order), "signs": list(s.signs), "n": s.n, "strategy": strategy, "seed": seed}


def samples_from_json(obj: dict) -> SignSampleSet:
    try:
        return SignSampleSet(tuple(obj["order"]), tuple(obj["signs"]), int(obj["n"]))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"samples JSON needs 'order', 'signs' and 'n': {exc}") from exc


def save_samples(s: SignSampleSet, path, strategy: str, seed: int | None = None) -> None:
    Path(path).write_text(json.dumps(samples_to_json(s, strategy, seed)) + "\n")


def load_samples(path) -> SignSampleSet:
    return samples_from_json(json.loads(Path(path).read_text()))
