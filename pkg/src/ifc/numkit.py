"""Dense kernels for nonnegative matrices and positive weight vectors.

Everything here is a pure function of its arguments. Matrices are small
(tens of rows), so plain numpy arrays and O(K^3) algorithms are used.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

SPECTRAL_RTOL = 1e-12
SPECTRAL_MAX_STEPS = 100_000


class CertificateImpossible(ValueError):
    """No positive weight vector can certify the matrix (rho >= 1)."""

    def __init__(self, message: str, rho: float):
        super().__init__(message)
        self.rho = rho


class SpectralRadiusWarning(RuntimeWarning):
    pass


def as_vec(x, name: str = "x") -> np.ndarray:
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-d vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def as_mat(a, name: str = "A", square: bool = True) -> np.ndarray:
    arr = np.atleast_2d(np.asarray(a, dtype=float))
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-d")
    if square and arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def _positive(v, n: int, name: str = "v") -> np.ndarray:
    v = as_vec(v, name)
    if v.size != n:
        raise ValueError(f"{name} has length {v.size}, expected {n}")
    if np.any(v <= 0):
        raise ValueError(f"{name} must be strictly positive")
    return v


def _nonnegative(a, name: str = "A") -> np.ndarray:
    a = as_mat(a, name)
    if np.any(a < 0):
        raise ValueError(f"{name} has a negative entry")
    return a


def weighted_max_norm_vec(x, v) -> float:
    """max_i |x_i| / v_i."""
    x = as_vec(x)
    v = _positive(v, x.size)
    return float(np.max(np.abs(x) / v))


def weighted_max_norm_mat(a, v) -> float:
    """Norm of a nonnegative matrix induced by the v-weighted max norm.

    For A >= 0 this is max_i (A v)_i / v_i, so sum_j A_ij v_j <= result * v_i
    holds row by row with equality on the maximizing row.
    """
    a = _nonnegative(a)
    v = _positive(v, a.shape[1])
    if a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    return float(np.max((a @ v) / v))


def collatz_wielandt(a, x) -> tuple[float, float]:
    """Bounds min_i (Ax)_i/x_i <= rho(A) <= max_i (Ax)_i/x_i for x > 0."""
    a = as_mat(a)
    x = _positive(x, a.shape[0], "x")
    ratios = (a @ x) / x
    return float(ratios.min()), float(ratios.max())


@dataclass(frozen=True)
class PerronEstimate:
    """Result of a spectral radius computation.

    ``vector`` is the Perron vector (normalized to max entry 1) and is only
    populated when the matrix is irreducible. ``lower``/``upper`` bracket the
    radius; they coincide to ``rtol`` when ``converged``.
    """

    value: float
    lower: float
    upper: float
    converged: bool
    steps: int
    vector: np.ndarray | None = None


def _balance(b: np.ndarray, sweeps: int = 50, tol: float = 1e-2) -> np.ndarray:
    """Osborne scaling d so that D^-1 B D has matching off-diagonal row and
    column sums; the spectrum is unchanged and badly scaled blocks become
    tractable for power iteration."""
    n = b.shape[0]
    d = np.ones(n)
    off = b - np.diag(np.diag(b))
    for _ in range(sweeps):
        done = True
        for i in range(n):
            r = float(off[i] @ d) / d[i]
            c = float(off[:, i] @ (1.0 / d)) * d[i]
            if r == 0.0 or c == 0.0:
                continue
            f = np.sqrt(r / c)
            if abs(f - 1.0) > tol:
                done = False
            d[i] *= f
        if done:
            break
    return d


def _irreducible_radius(b: np.ndarray, rtol: float, max_steps: int):
    """Shifted power iteration with Collatz-Wielandt stopping on one block."""
    n = b.shape[0]
    if n == 1:
        return float(b[0, 0]), float(b[0, 0]), float(b[0, 0]), True, 0, np.ones(1)
    d = _balance(b)
    b = b * d[None, :] / d[:, None]
    # A positive shift on an irreducible block makes it primitive; a shift of
    # the order of rho damps periodic spectra without slowing the rest much.
    shift = float(b.sum(axis=1).mean())
    shifted = b + shift * np.eye(n)
    x = np.ones(n)
    lo = hi = np.nan
    converged = False
    step = 0
    for step in range(1, max_steps + 1):
        y = shifted @ x
        ratios = y / x
        lo, hi = float(ratios.min()), float(ratios.max())
        x = y / y.max()
        if hi - lo <= rtol * hi:
            converged = True
            break
    lo, hi = max(lo - shift, 0.0), max(hi - shift, 0.0)
    value = 0.5 * (lo + hi)
    vec = d * x
    return value, lo, hi, converged, step, vec / vec.max()


def perron(a, rtol: float = SPECTRAL_RTOL, max_steps: int = SPECTRAL_MAX_STEPS) -> PerronEstimate:
    """Spectral radius of a nonnegative square matrix.

    The matrix is split into strongly connected components; the radius is the
    largest radius over the irreducible diagonal blocks, each computed by
    shifted power iteration.
    """
    a = _nonnegative(a)
    n = a.shape[0]
    if not np.any(a):
        return PerronEstimate(0.0, 0.0, 0.0, True, 0, np.ones(n) if n == 1 else None)
    n_comp, labels = connected_components(a != 0, directed=True, connection="strong")
    best = PerronEstimate(0.0, 0.0, 0.0, True, 0)
    steps = 0
    all_converged = True
    vector = None
    for comp in range(n_comp):
        idx = np.flatnonzero(labels == comp)
        block = a[np.ix_(idx, idx)]
        if idx.size == 1 and block[0, 0] == 0:
            continue
        value, lo, hi, conv, k, vec = _irreducible_radius(block, rtol, max_steps)
        steps += k
        all_converged &= conv
        if hi > best.upper:
            best = PerronEstimate(value, lo, hi, conv, k)
        if n_comp == 1:
            vector = vec
    return PerronEstimate(best.value, best.lower, best.upper, all_converged, steps, vector)


def spectral_radius(a, rtol: float = SPECTRAL_RTOL, max_steps: int = SPECTRAL_MAX_STEPS) -> float:
    est = perron(a, rtol, max_steps)
    if not est.converged:
        warnings.warn(
            f"power iteration did not converge in {max_steps} steps; "
            f"rho in [{est.lower:.6g}, {est.upper:.6g}]",
            SpectralRadiusWarning,
            stacklevel=2,
        )
    return est.value


def gauss_solve(a, b) -> np.ndarray:
    """Solve a x = b by Gaussian elimination with partial pivoting."""
    a = as_mat(a).copy()
    x = as_vec(b, "b").copy()
    n = a.shape[0]
    if x.size != n:
        raise ValueError("dimension mismatch")
    for k in range(n):
        piv = k + int(np.argmax(np.abs(a[k:, k])))
        if a[piv, k] == 0.0:
            raise np.linalg.LinAlgError("singular system")
        if piv != k:
            a[[k, piv]] = a[[piv, k]]
            x[[k, piv]] = x[[piv, k]]
        factors = a[k + 1:, k] / a[k, k]
        a[k + 1:, k:] -= np.outer(factors, a[k, k:])
        x[k + 1:] -= factors * x[k]
    for k in range(n - 1, -1, -1):
        x[k] = (x[k] - a[k, k + 1:] @ x[k + 1:]) / a[k, k]
    if not np.all(np.isfinite(x)):
        raise np.linalg.LinAlgError("singular system")
    return x


def _require_stable(m: np.ndarray) -> float:
    est = perron(m)
    if est.value >= 1.0:
        raise CertificateImpossible(f"spectral radius {est.value:.6g} >= 1", est.value)
    return est.value


def weight_vector_for(m, x=None) -> np.ndarray:
    """Return v = (I - M)^{-1} x, which satisfies M v < v when rho(M) < 1."""
    m = _nonnegative(m, "M")
    n = m.shape[0]
    x = np.ones(n) if x is None else _positive(x, n, "x")
    _require_stable(m)
    v = gauss_solve(np.eye(n) - m, x)
    if np.any(v <= 0):
        raise CertificateImpossible("(I - M)^{-1} x is not positive", spectral_radius(m))
    return v


def solve_linear_fixed_point(m, n_vec) -> np.ndarray:
    """Fixed point p* = M p* + N of a stable affine map."""
    m = _nonnegative(m, "M")
    n_vec = _positive(n_vec, m.shape[0], "N")
    _require_stable(m)
    p = gauss_solve(np.eye(m.shape[0]) - m, n_vec)
    if np.any(p <= 0):
        raise ValueError("targets infeasible: fixed point not positive")
    return p
