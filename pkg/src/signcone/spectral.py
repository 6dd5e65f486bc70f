"""Laplacian spectrum, graph Fourier transform and band-limited bases.

The eigensolver is a plain cyclic Jacobi iteration; at the graph sizes used
here (tens to a few hundred vertices) it is fast enough and keeps the
decomposition fully deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from signcone.errors import (
    BandOutOfRange,
    ConvergenceFailure,
    DegenerateDraw,
    DimensionMismatch,
    ValidationError,
)

JACOBI_REL_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
SIGN_CONVENTION_TOL = 1e-12
MAX_REDRAWS = 8


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # column k pairs with eigenvalues[k]

    @property
    def n(self) -> int:
        return len(self.eigenvalues)


@dataclass(frozen=True)
class Band:
    """Passband given by 1-based spectral indices, inclusive on both ends."""

    f_lo: int
    f_hi: int

    @property
    def width(self) -> int:
        return self.f_hi - self.f_lo + 1


@dataclass(frozen=True)
class BandBasis:
    matrix: np.ndarray  # n x B, orthonormal columns
    band: Band

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def B(self) -> int:
        return self.matrix.shape[1]


def jacobi_eigh(A: np.ndarray, rel_tol: float = JACOBI_REL_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Returns unsorted ``(eigenvalues, eigenvectors)``.  Stops once the
    off-diagonal Frobenius norm drops below ``rel_tol * ||A||_F``.
    """
    A = np.array(A, dtype=float)
    n = A.shape[0]
    V = np.eye(n)
    norm_f = np.linalg.norm(A)
    target = rel_tol * norm_f
    for _ in range(max_sweeps + 1):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= target:
            return np.diag(A).copy(), V
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                cp, cq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
                rp, rq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                A[p, q] = A[q, p] = 0.0
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    raise ConvergenceFailure(f"Jacobi did not converge within {max_sweeps} sweeps")


def _fix_signs(U: np.ndarray) -> np.ndarray:
    U = U.copy()
    for k in range(U.shape[1]):
        nz = np.flatnonzero(np.abs(U[:, k]) > SIGN_CONVENTION_TOL)
        if len(nz) and U[nz[0], k] < 0:
            U[:, k] = -U[:, k]
    return U


def eigendecompose(L: np.ndarray) -> Spectrum:
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {L.shape}")
    if not np.allclose(L, L.T, rtol=0, atol=1e-12 * max(1.0, np.abs(L).max(initial=0.0))):
        raise ValidationError("eigendecompose expects a symmetric matrix")
    L = 0.5 * (L + L.T)
    vals, vecs = jacobi_eigh(L)
    order = np.argsort(vals, kind="stable")
    return Spectrum(eigenvalues=_frozen(vals[order]), eigenvectors=_frozen(_fix_signs(vecs[:, order])))


def _check_len(spec_n: int, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (spec_n,):
        raise DimensionMismatch(f"signal of shape {x.shape} does not match n={spec_n}")
    return x


def gft(spec: Spectrum, x) -> np.ndarray:
    return spec.eigenvectors.T @ _check_len(spec.n, x)


def igft(spec: Spectrum, xhat) -> np.ndarray:
    return spec.eigenvectors @ _check_len(spec.n, xhat)


def band_basis(spec: Spectrum, band: Band) -> BandBasis:
    if not (1 <= band.f_lo <= band.f_hi <= spec.n):
        raise BandOutOfRange(f"band [{band.f_lo}, {band.f_hi}] is not within [1, {spec.n}]")
    return BandBasis(matrix=_frozen(spec.eigenvectors[:, band.f_lo - 1 : band.f_hi]), band=band)


def random_bandlimited_signal(basis: BandBasis, seed: int) -> np.ndarray:
    """Unit-norm signal ``U_B a`` with ``a`` standard normal."""
    rng = np.random.default_rng(seed)
    for _ in range(MAX_REDRAWS + 1):
        alpha = rng.standard_normal(basis.B)
        x = basis.matrix @ alpha
        norm = np.linalg.norm(x)
        if norm >= 1e-12:
            return x / norm
    raise DegenerateDraw(f"band-limited draw kept collapsing to zero (seed={seed})")


def save_signal(x, path) -> None:
    Path(path).write_text("".join(f"{v!r}\n" for v in np.asarray(x, dtype=float).tolist()))


def load_signal(path, n: int | None = None) -> np.ndarray:
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    try:
        x = np.array([float(v) for v in lines])
    except ValueError as exc:
        raise ValidationError(f"{path}: signal CSV must hold one number per line") from exc
    if not np.all(np.isfinite(x)):
        raise ValidationError(f"{path}: signal has non-finite entries")
    if n is not None and len(x) != n:
        raise DimensionMismatch(f"{path}: signal has {len(x)} values, graph has {n} vertices")
    return x
