"""Concrete interference functions built from a static network scenario.

Gains are stored as an R x K array ``gains[r, j]`` (base r, user j). Targets
are linear SINR; use :func:`db_to_linear` for dB inputs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import InterferenceFunction, LogUniformSampler
from .numkit import as_mat, as_vec, spectral_radius


def db_to_linear(db) -> np.ndarray:
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


@dataclass(frozen=True, eq=False)
class NetworkScenario:
    gains: np.ndarray
    noise: np.ndarray
    targets: np.ndarray
    assignment: np.ndarray | None = None

    def __post_init__(self):
        g = as_mat(self.gains, "gains", square=False)
        eta = as_vec(self.noise, "noise")
        gamma = as_vec(self.targets, "targets")
        if g.shape != (eta.size, gamma.size):
            raise ValueError(f"gains must be R x K = {eta.size} x {gamma.size}, got {g.shape}")
        if np.any(g <= 0) or np.any(eta <= 0) or np.any(gamma <= 0):
            raise ValueError("gains, noise and targets must be strictly positive")
        object.__setattr__(self, "gains", g)
        object.__setattr__(self, "noise", eta)
        object.__setattr__(self, "targets", gamma)
        if self.assignment is not None:
            r = np.asarray(self.assignment, dtype=int).reshape(-1)
            if r.size != gamma.size or np.any(r < 0) or np.any(r >= eta.size):
                raise ValueError("assignment indices out of range")
            object.__setattr__(self, "assignment", r)

    @property
    def n_users(self) -> int:
        return self.targets.size

    @property
    def n_bases(self) -> int:
        return self.noise.size

    @property
    def default_assignment_used(self) -> bool:
        return self.assignment is None

    def bases(self) -> np.ndarray:
        """Assigned base per user; strongest server when none was given."""
        if self.assignment is not None:
            return self.assignment
        return np.argmax(self.gains, axis=0)


@dataclass(frozen=True, eq=False)
class NormalizedMatrixSet:
    """Per-base normalized gain matrices and offsets.

    ``per_base[r]`` is M_r, ``offsets[r]`` is N^(r); ``assigned``/``noise_term``
    are M and N under the scenario's assignment; ``macro`` holds the H_r.
    """

    per_base: np.ndarray
    offsets: np.ndarray
    assigned: np.ndarray
    noise_term: np.ndarray
    macro: np.ndarray


def build_normalized(sc: NetworkScenario) -> NormalizedMatrixSet:
    g, eta, gamma = sc.gains, sc.noise, sc.targets
    k = sc.n_users
    # M^(r)_ij = gamma_i G_rj / G_ri, zero diagonal
    per_base = gamma[None, :, None] * g[:, None, :] / g[:, :, None]
    per_base[:, np.arange(k), np.arange(k)] = 0.0
    offsets = gamma[None, :] * eta[:, None] / g
    r = sc.bases()
    users = np.arange(k)
    assigned = per_base[r, users, :]
    noise_term = offsets[r, users]
    total = g.sum(axis=0)
    macro = gamma[None, :, None] * g[:, None, :] / total[None, :, None]
    macro[:, users, users] = 0.0
    return NormalizedMatrixSet(per_base, offsets, assigned, noise_term, macro)


def linear_if(sc: NetworkScenario) -> InterferenceFunction:
    nm = build_normalized(sc)
    return affine_if(nm.assigned, nm.noise_term, name="linear")


def affine_if(m, n_vec, name: str = "affine") -> InterferenceFunction:
    m = as_mat(m, "M")
    n_vec = as_vec(n_vec, "N")
    return InterferenceFunction(
        n_vec.size, lambda p: m @ p + n_vec, name=name, kind="standard",
        meta={"M": m, "N": n_vec},
    )


def min_power_if(sc: NetworkScenario) -> InterferenceFunction:
    nm = build_normalized(sc)
    ms, ns = nm.per_base, nm.offsets
    return InterferenceFunction(
        sc.n_users, lambda p: np.min(ms @ p + ns, axis=0), name="mpa", kind="standard",
        meta={"matrices": ms},
    )


def macro_diversity_if(sc: NetworkScenario) -> InterferenceFunction:
    nm = build_normalized(sc)
    ms, ns = nm.per_base, nm.offsets
    return InterferenceFunction(
        sc.n_users, lambda p: 1.0 / np.sum(1.0 / (ms @ p + ns), axis=0),
        name="macro", kind="standard", meta={"matrices": ms},
    )


def macro_overestimate_if(sc: NetworkScenario) -> InterferenceFunction:
    g, gamma = sc.gains, sc.targets
    eta_hat = float(sc.noise.max())
    total = g.sum(axis=0)
    k = sc.n_users
    # others[r, i, j] = G_rj for j != i; summing directly avoids the
    # cancellation in (G p)_r - G_ri p_i that breaks monotonicity in floats
    others = np.broadcast_to(g[:, None, :], (g.shape[0], k, k)).copy()
    others[:, np.arange(k), np.arange(k)] = 0.0

    def evaluate(p):
        m = others @ p
        return gamma * (m.max(axis=0) + eta_hat) / total

    return InterferenceFunction(
        sc.n_users, evaluate, name="macro-over", kind="standard",
        meta={"matrices": build_normalized(sc).macro},
    )


# --- utility-based power control -------------------------------------------

INVERSE_TOL = 1e-12
INVERSE_MAX_ITER = 200


@dataclass(frozen=True, eq=False)
class UbpcParams:
    """Sigmoid steepness ``a`` and price ``alpha`` per user."""

    a: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        a = as_vec(self.a, "a")
        alpha = as_vec(self.alpha, "alpha")
        if a.size != alpha.size:
            raise ValueError("a and alpha must have equal length")
        if np.any(a <= 0) or np.any(alpha <= 0):
            raise ValueError("a and alpha must be positive")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "alpha", alpha)

    def midpoints(self, targets) -> np.ndarray:
        """b_i = gamma_i - ln(a_i gamma_i - 1) / a_i."""
        gamma = as_vec(targets, "targets")
        if np.any(self.a * gamma <= 1.0):
            raise ValueError("need a_i * gamma_i > 1 for every user")
        return gamma - np.log(self.a * gamma - 1.0) / self.a


def sigmoid_utility(s, a: float, b: float):
    return 1.0 / (1.0 + np.exp(-a * (np.asarray(s, float) - b)))


def marginal_utility(s, a: float, b: float):
    """U'(s) = a U (1 - U); peaks at a/4 when s = b."""
    z = np.exp(-a * np.abs(np.asarray(s, float) - b))
    return a * z / (1.0 + z) ** 2


def marginal_utility_inverse(y: float, a: float, b: float) -> float:
    """Decreasing-branch inverse of U' on [b, b + 200/a] by bisection.

    Arguments at or above the peak a/4 map to b; arguments below U'(b + 200/a)
    map to the right end of the bracket.
    """
    peak = a / 4.0
    if y >= peak:
        return b
    lo, hi = b, b + 200.0 / a
    if y <= marginal_utility(hi, a, b):
        return hi
    for _ in range(INVERSE_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if marginal_utility(mid, a, b) > y:
            lo = mid
        else:
            hi = mid
        if hi - lo <= INVERSE_TOL:
            break
    return 0.5 * (lo + hi)


def ubpc_if(sc: NetworkScenario, params: UbpcParams) -> InterferenceFunction:
    """I_i(p) = x_i f_i^{-1}(alpha_i x_i) with x = M p + N."""
    if params.a.size != sc.n_users:
        raise ValueError("UBPC parameters must have one entry per user")
    nm = build_normalized(sc)
    m, n_vec = nm.assigned, nm.noise_term
    a, alpha = params.a, params.alpha
    b = params.midpoints(sc.targets)
    peak = a / 4.0

    def evaluate(p):
        x = m @ p + n_vec
        y = alpha * x
        sir = b.copy()
        for i in np.flatnonzero(y < peak):
            sir[i] = marginal_utility_inverse(y[i], a[i], b[i])
        return x * sir

    # x >= N for p >= 0, so alpha N >= a/4 keeps every evaluation at the peak
    saturated = bool(np.all(alpha * n_vec >= peak))
    return InterferenceFunction(
        sc.n_users, evaluate, name="ubpc", kind="standard" if saturated else "unclassified",
        meta={"b": b, "M_b": b[:, None] * m, "saturated": saturated},
    )


# --- robust power control ---------------------------------------------------

@dataclass(frozen=True, eq=False)
class IntervalUncertainty:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = as_mat(self.lower, "lower")
        hi = as_mat(self.upper, "upper")
        if lo.shape != hi.shape:
            raise ValueError("interval bounds must have equal shape")
        if np.any(lo < 0) or np.any(lo > hi):
            raise ValueError("need 0 <= lower <= upper elementwise")
        if np.any(np.diag(hi) != 0):
            raise ValueError("interval matrices must have zero diagonal")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    def support(self, p) -> np.ndarray:
        """Row-wise sup over the box of M_i^T p."""
        p = np.asarray(p, float)
        return np.maximum(self.lower * p, self.upper * p).sum(axis=1)


def drpc_if(n_vec, unc: IntervalUncertainty) -> InterferenceFunction:
    n_vec = as_vec(n_vec, "N")
    if n_vec.size != unc.upper.shape[0]:
        raise ValueError("dimension mismatch")
    return InterferenceFunction(
        n_vec.size, lambda p: unc.support(p) + n_vec, name="drpc", kind="standard",
        meta={"uncertainty": unc, "N": n_vec},
    )


def clamp_if(fn: InterferenceFunction, p_min, p_max) -> InterferenceFunction:
    """max(p_min, min(p_max, I(p))); keeps (c, v) of a contractive parent."""
    lo = as_vec(p_min, "p_min")
    hi = as_vec(p_max, "p_max")
    if lo.size != fn.dim or hi.size != fn.dim:
        raise ValueError("bounds must have length dim")
    if np.any(lo <= 0) or np.any(lo > hi):
        raise ValueError("need 0 < p_min <= p_max")
    return InterferenceFunction(
        fn.dim, lambda p: np.maximum(lo, np.minimum(hi, fn(p))), name=f"clamped-{fn.name}",
        kind=fn.kind, modulus=fn.modulus, weights=fn.weights,
        meta={**fn.meta, "parent": fn, "p_min": lo, "p_max": hi},
    )


# --- scalar counterexamples -------------------------------------------------

def _example3(p):
    p = float(p[0])
    if p <= 0.25:
        return np.array([p * p + 0.01])
    return np.array([0.5 * p - 1.0 / 16.0 + 0.01])


def scalar_fixtures() -> dict[str, InterferenceFunction]:
    """The scalar functions used as regression fixtures, keyed by name.

    ``meta["expected"]`` records the verdicts each one should produce and
    ``meta["probes"]`` explicit sample points that exhibit them. A
    ``meta["sampler"]`` narrows the sampling range where float64 cannot
    resolve the function: p + exp(-p) rounds to p once p exceeds about 37.
    """
    ex1 = InterferenceFunction(
        1, lambda p: 2.0 * p + 1.0, name="example1", kind="standard",
        meta={"expected": {"contractive": False, "diverges": True, "lipschitz": 2.0}},
    )
    ex2 = InterferenceFunction(
        1, lambda p: 4.0 / (1.0 + np.exp(-(p - 2.0))), name="example2", kind="standard",
        meta={"expected": {"fixed_point": 2.0, "sublinear": True},
              "probes": {"contractivity": [(np.array([2.0]), 1e-4)]}},
    )
    ex3 = InterferenceFunction(
        1, _example3, name="example3", kind="contractive", modulus=0.5, weights=np.ones(1),
        meta={"expected": {"contractivity": True, "scalability": False},
              "probes": {"scalability": [(np.array([0.125]), 2.0)]}},
    )
    no_fp = InterferenceFunction(
        1, lambda p: p + np.exp(-p), name="no-fixed-point", kind="standard",
        meta={"expected": {"fixed_point": None}, "sampler": LogUniformSampler(1e-6, 30.0)},
    )
    return {f.name: f for f in (ex1, ex2, ex3, no_fp)}


# --- scenarios ----------------------------------------------------------------

EXAMPLE4_GAINS = np.array([
    [1e-4, 6.82e-7, 3.57e-8, 2.12e-8],
    [1.52e-7, 6.25e-4, 3.51e-6, 1.98e-7],
    [7.67e-9, 2.44e-8, 1.23e-6, 5.16e-9],
    [2.63e-7, 4.82e-8, 2.56e-7, 3.28e-5],
])
EXAMPLE4_TARGETS_DB = np.array([6.0, 6.0, 8.0, 10.0])
EXAMPLE4_A = np.array([1.02, 1.32, 0.88, 1.05])
EXAMPLE4_ALPHA = 5000.0
EXAMPLE4_NOISE = 0.5


def example4() -> tuple[NetworkScenario, UbpcParams]:
    """Four mobiles sharing one channel, each served by its own receiver."""
    sc = NetworkScenario(
        EXAMPLE4_GAINS, np.full(4, EXAMPLE4_NOISE), db_to_linear(EXAMPLE4_TARGETS_DB),
        assignment=np.arange(4),
    )
    return sc, UbpcParams(EXAMPLE4_A, np.full(4, EXAMPLE4_ALPHA))


def random_scenario(rng: np.random.Generator, k: int, r: int = 1,
                    cross: float = 0.1, target_db: tuple[float, float] = (0.0, 6.0)) -> NetworkScenario:
    """Random positive gains with strong diagonal links and weak cross links."""
    gains = rng.uniform(0.01, 1.0, size=(r, k)) * cross
    own = rng.integers(0, r, size=k)
    gains[own, np.arange(k)] = rng.uniform(0.5, 1.0, size=k)
    noise = rng.uniform(0.05, 0.5, size=r)
    targets = db_to_linear(rng.uniform(*target_db, size=k))
    return NetworkScenario(gains, noise, targets, assignment=own)


def random_feasible_scenario(rng: np.random.Generator, k: int, rho: float) -> NetworkScenario:
    """One receiver per user; targets scaled so the assigned matrix has radius ``rho``."""
    gains = rng.uniform(0.01, 0.2, size=(k, k))
    gains[np.arange(k), np.arange(k)] = rng.uniform(0.5, 1.0, size=k)
    noise = rng.uniform(0.05, 0.5, size=k)
    targets = db_to_linear(rng.uniform(0.0, 6.0, size=k))
    base = NetworkScenario(gains, noise, targets, assignment=np.arange(k))
    rho0 = spectral_radius(build_normalized(base).assigned)
    return NetworkScenario(gains, noise, targets * (rho / rho0), base.assignment)
