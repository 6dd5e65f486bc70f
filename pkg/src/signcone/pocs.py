"""Alternating projections between the band-limited subspace and the sign cone."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from signcone.errors import DimensionMismatch, EmptyList, InvalidVertex, ValidationError, ZeroVector
from signcone.sampling import SIGN_EPS, SignSampleSet
from signcone.spectral import BandBasis

COLLAPSE_NORM = 1e-300
STEP_NORM_CONVERGED = 1e-6


@dataclass(frozen=True)
class PocsConfig:
    max_iters: int = 10000
    rel_tol: float = 1e-9  # 0 disables the early stop
    trace_stride: int = 1

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValidationError("max_iters must be >= 1")
        if self.rel_tol < 0:
            raise ValidationError("rel_tol must be >= 0")
        if self.trace_stride < 1:
            raise ValidationError("trace_stride must be >= 1")


@dataclass
class PocsResult:
    x_star: np.ndarray
    iterations_run: int
    converged: bool
    collapsed: bool = False
    final_step: float = float("nan")
    trace: list[tuple[int, float, float]] = field(default_factory=list)


@dataclass
class BatchResult:
    """Column-wise outcome of :func:`pocs_batch` (one column per initial signal)."""

    X: np.ndarray
    iterations: np.ndarray
    final_step: np.ndarray
    converged: np.ndarray
    collapsed: np.ndarray
    trace_iters: list[int]
    trace_angles: np.ndarray  # (len(trace_iters), K); nan without reference
    trace_steps: np.ndarray
    fejer_violation: float  # largest increase of ||x_n - ref|| seen (<= 0 if monotone)


def project_band(x, basis: BandBasis) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[0] != basis.n:
        raise DimensionMismatch(f"signal length {x.shape[0]} does not match basis with n={basis.n}")
    U = basis.matrix
    return U @ (U.T @ x)


def _check_samples(n: int, s: SignSampleSet):
    if s.n != n:
        raise InvalidVertex(f"sample set is for n={s.n}, signal has length {n}")


def project_signs(x, s: SignSampleSet) -> np.ndarray:
    """Zero every sampled entry whose sign disagrees with the acquired one."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionMismatch("project_signs expects a 1-D signal")
    _check_samples(x.shape[0], s)
    pv = _SignProjector(s)
    y = x.copy()
    y[pv.rows] = x[pv.rows] - pv.violations(x[pv.rows, None])[:, 0]
    return y


def angle_error(x, y) -> float:
    """Angle in degrees between ``x`` and ``y``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    if nx == 0 or ny == 0:
        raise ZeroVector("angle is undefined for a zero vector")
    return float(np.degrees(np.arccos(np.clip((x / nx) @ (y / ny), -1.0, 1.0))))


def _angles(ref: np.ndarray, X: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(X, axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        cos = (ref / np.linalg.norm(ref)) @ X / norms
    out = np.degrees(np.arccos(np.clip(cos, -1.0, 1.0)))
    out[norms == 0] = np.nan
    return out


class _SignProjector:
    """Sign-cone projection restricted to the sampled rows."""

    def __init__(self, s: SignSampleSet):
        self.rows = np.array(s.order, dtype=int)
        signs = np.array(s.signs, dtype=float)[:, None]
        self.signs = signs
        self.zero = signs == 0

    def violations(self, XS: np.ndarray) -> np.ndarray:
        """Entries of the sampled rows ``XS`` that P_v would zero (others set to 0)."""
        keep = np.where(self.zero, np.abs(XS) <= SIGN_EPS, self.signs * XS > SIGN_EPS)
        return np.where(keep, 0.0, XS)


def pocs_batch(
    s: SignSampleSet,
    basis: BandBasis,
    X0: np.ndarray,
    cfg: PocsConfig,
    reference=None,
    check_fejer: bool = False,
) -> BatchResult:
    """Iterate ``x <- P_b P_v x`` on every column of ``X0`` at once.

    After the first step every iterate lies in the band, so the loop carries
    band coordinates ``a`` (``x = U_B a``); norms and step lengths are taken
    in coordinate space, where they agree with signal space.  Columns that
    meet the relative step tolerance or collapse to zero are frozen while the
    others continue.
    """
    X0 = np.array(X0, dtype=float)
    if X0.ndim != 2 or X0.shape[0] != basis.n:
        raise DimensionMismatch(f"initial block of shape {X0.shape} does not match n={basis.n}")
    _check_samples(basis.n, s)
    if np.any(np.linalg.norm(X0, axis=0) == 0):
        raise ZeroVector("initial signal must be nonzero")
    ref = None if reference is None else np.asarray(reference, dtype=float)
    if ref is not None and ref.shape != (basis.n,):
        raise DimensionMismatch("reference length does not match the basis")

    K = X0.shape[1]
    U = basis.matrix
    pv = _SignProjector(s)
    active = np.ones(K, dtype=bool)
    early = np.zeros(K, dtype=bool)
    collapsed = np.zeros(K, dtype=bool)
    iterations = np.zeros(K, dtype=int)
    final_step = np.full(K, np.nan)
    trace_iters: list[int] = []
    trace_angles: list[np.ndarray] = []
    trace_steps: list[np.ndarray] = []
    fejer = -np.inf
    track = check_fejer and ref is not None
    if track:
        ref_a = U.T @ ref
        ref_out = np.linalg.norm(ref - U @ ref_a)  # zero for a band-limited reference
        dist = np.linalg.norm(X0 - ref[:, None], axis=0)

    US = U[pv.rows]
    A = None
    for t in range(1, cfg.max_iters + 1):
        if A is None:
            Y = X0.copy()
            Y[pv.rows] -= pv.violations(X0[pv.rows])
            An = U.T @ Y
            step = np.linalg.norm(U @ An - X0, axis=0)
            prev_norm = np.linalg.norm(X0, axis=0) if cfg.rel_tol > 0 else None
        else:
            # x = U_B a is already band-limited: only sampled rows change under P_v
            An = A - US.T @ pv.violations(US @ A)
            step = np.linalg.norm(An - A, axis=0)
            prev_norm = np.linalg.norm(A, axis=0) if cfg.rel_tol > 0 else None
        if track:
            new_dist = np.sqrt(np.linalg.norm(An - ref_a[:, None], axis=0) ** 2 + ref_out**2)
            if active.any():
                fejer = max(fejer, float((new_dist - dist)[active].max()))
            dist = np.where(active, new_dist, dist)

        if A is None or active.all():
            A = An
            final_step = step
        else:
            A = np.where(active, An, A)
            final_step = np.where(active, step, final_step)
        iterations += active

        gone = active & (np.linalg.norm(A, axis=0) < COLLAPSE_NORM)
        if gone.any():
            collapsed |= gone
            active &= ~gone
        if cfg.rel_tol > 0:
            done = active & (step <= cfg.rel_tol * np.maximum(prev_norm, COLLAPSE_NORM))
            early |= done
            active &= ~done

        last = t == cfg.max_iters or not active.any()
        if t == 1 or t % cfg.trace_stride == 0 or last:
            trace_iters.append(t)
            trace_steps.append(np.array(final_step, copy=True))
            trace_angles.append(_angles(ref, U @ A) if ref is not None else np.full(K, np.nan))
        if not active.any():
            break
    X = U @ A

    converged = ~collapsed & (early | (final_step < STEP_NORM_CONVERGED))
    return BatchResult(
        X=X,
        iterations=iterations,
        final_step=final_step,
        converged=converged,
        collapsed=collapsed,
        trace_iters=trace_iters,
        trace_angles=np.array(trace_angles),
        trace_steps=np.array(trace_steps),
        fejer_violation=fejer,
    )


def pocs_reconstruct(
    s: SignSampleSet,
    basis: BandBasis,
    x0,
    cfg: PocsConfig | None = None,
    reference=None,
) -> PocsResult:
    cfg = cfg or PocsConfig()
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (basis.n,):
        raise DimensionMismatch(f"x0 of shape {x0.shape} does not match n={basis.n}")
    if not np.linalg.norm(x0) > 0:
        raise ZeroVector("initial signal must be nonzero")
    res = pocs_batch(s, basis, x0[:, None], cfg, reference)
    trace = [
        (it, float(a), float(st))
        for it, a, st in zip(res.trace_iters, res.trace_angles[:, 0], res.trace_steps[:, 0])
    ]
    return PocsResult(
        x_star=res.X[:, 0],
        iterations_run=int(res.iterations[0]),
        converged=bool(res.converged[0]),
        collapsed=bool(res.collapsed[0]),
        final_step=float(res.final_step[0]),
        trace=trace,
    )


def mean_angle_error(x, results) -> float:
    results = list(results)
    if not results:
        raise EmptyList("need at least one reconstruction")
    return float(np.mean([angle_error(x, r.x_star) for r in results]))


def save_trace(trace, path) -> None:
    lines = ["iteration,angle_error_deg,step_norm"]
    lines += [f"{it},{a!r},{st!r}" for it, a, st in trace]
    Path(path).write_text("\n".join(lines) + "\n")
