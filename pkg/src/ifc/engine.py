"""Synchronous and logical-time asynchronous fixed-point iterations."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import InterferenceFunction
from .numkit import as_vec

DIVERGENCE_LIMIT = 1e15
REFERENCE_TOL = 1e-13
ENVELOPE_RTOL = 1e-9
SUBLINEAR_RATE = 0.999


@dataclass
class IterationTrace:
    """Powers p(0..n) of one run plus how and why it stopped.

    ``errors`` is filled by :meth:`attach_errors` once p* and v are known.
    Async runs also record which users updated and the largest staleness
    used at each step.
    """

    powers: np.ndarray
    stop_reason: str
    mode: str = "sync"
    seed: int | None = None
    schedule: dict = field(default_factory=dict)
    updated: np.ndarray | None = None
    staleness: np.ndarray | None = None
    errors: np.ndarray | None = None
    p_star: np.ndarray | None = None
    weights: np.ndarray | None = None

    @property
    def steps(self) -> int:
        return self.powers.shape[0] - 1

    @property
    def final(self) -> np.ndarray:
        return self.powers[-1]

    @property
    def diverged(self) -> bool:
        return self.stop_reason == "divergence"

    def attach_errors(self, p_star, v=None) -> np.ndarray:
        p_star = as_vec(p_star, "p*")
        v = np.ones(p_star.size) if v is None else as_vec(v, "v")
        self.p_star, self.weights = p_star, v
        self.errors = np.max(np.abs(self.powers - p_star) / v, axis=1)
        return self.errors


def _check_run_args(fn: InterferenceFunction, p0, tol: float, max_iter: int) -> np.ndarray:
    p0 = as_vec(p0, "p0")
    if p0.size != fn.dim:
        raise ValueError(f"p0 has length {p0.size}, expected {fn.dim}")
    if np.any(p0 < 0):
        raise ValueError("p0 must be nonnegative")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    return p0


def _stopped(prev: np.ndarray, new: np.ndarray, tol: float) -> bool:
    return np.max(np.abs(new - prev)) <= tol * (1.0 + np.max(np.abs(prev)))


def run_sync(fn: InterferenceFunction, p0, tol: float = 1e-10, max_iter: int = 10_000) -> IterationTrace:
    """Iterate p(n+1) = I(p(n)) until successive iterates agree to ``tol``."""
    p = _check_run_args(fn, p0, tol, max_iter)
    powers = [p]
    reason = "max_iter"
    for _ in range(max_iter):
        new = fn(p)
        powers.append(new)
        if not np.all(np.isfinite(new)) or np.max(new) > DIVERGENCE_LIMIT:
            reason = "divergence"
            break
        if _stopped(p, new, tol):
            reason = "tol"
            break
        p = new
    return IterationTrace(np.array(powers), reason)


def reference_fixed_point(fn: InterferenceFunction, p0=None, max_iter: int = 1_000_000) -> np.ndarray:
    """High-accuracy p* from a long synchronous run (tol 1e-13)."""
    p0 = np.zeros(fn.dim) if p0 is None else p0
    trace = run_sync(fn, p0, REFERENCE_TOL, max_iter)
    if trace.stop_reason != "tol":
        raise RuntimeError(f"reference run for {fn.name} stopped by {trace.stop_reason}")
    return trace.final


@dataclass(frozen=True)
class AsyncSchedule:
    """Seeded generator of update sets and information delays.

    ``bounded``: every user updates every step and reads p_j(tau) with
    tau drawn uniformly from {t-D+1, ..., t} (own value always fresh).
    With ``closed_window`` the range is {t-D, ..., t} instead.

    ``total``: each user updates with probability ``update_prob`` and at least
    once every ``window`` steps; staleness is drawn from {0, ..., floor(t**growth)},
    unbounded over the run but with tau -> infinity.
    """

    mode: str = "bounded"
    delay: int = 0
    seed: int = 0
    window: int | None = None
    update_prob: float = 0.5
    growth: float = 0.5
    closed_window: bool = False

    def __post_init__(self):
        if self.mode not in ("bounded", "total"):
            raise ValueError("mode must be 'bounded' or 'total'")
        if self.delay < 0:
            raise ValueError("delay bound must be >= 0")
        if not 0.0 < self.update_prob <= 1.0:
            raise ValueError("update_prob must lie in (0, 1]")

    @property
    def max_staleness(self) -> int:
        if self.closed_window:
            return self.delay
        return max(self.delay - 1, 0)

    def resolved_window(self, k: int) -> int:
        return self.window if self.window is not None else 10 * k

    def describe(self) -> dict:
        return {"mode": self.mode, "D": self.delay, "seed": self.seed, "window": self.window,
                "update_prob": self.update_prob, "growth": self.growth,
                "closed_window": self.closed_window}


def run_async(fn: InterferenceFunction, p0, schedule: AsyncSchedule,
              tol: float = 1e-10, max_iter: int = 10_000) -> IterationTrace:
    """Asynchronous iteration with stale reads.

    User i updating at t evaluates I_i at the vector (p_1(tau^i_1(t)), ...);
    users that do not update hold their power. Times before 0 read p(0).
    """
    p = _check_run_args(fn, p0, tol, max_iter)
    k = fn.dim
    rng = np.random.default_rng(schedule.seed)
    window = schedule.resolved_window(k)
    history = np.empty((max_iter + 1, k))
    history[0] = p
    updated_log, stale_log = [], []
    last_update = np.zeros(k, dtype=int)
    cols = np.arange(k)
    reason = "max_iter"
    quiet = 0
    horizon = schedule.max_staleness + 1 if schedule.mode == "bounded" else window
    for t in range(max_iter):
        if schedule.mode == "bounded":
            updating = np.ones(k, dtype=bool)
            s_max = schedule.max_staleness
        else:
            updating = rng.random(k) < schedule.update_prob
            updating |= (t - last_update) >= window - 1
            s_max = int(math.floor(t ** schedule.growth)) if t > 0 else 0
        stale = rng.integers(0, s_max + 1, size=(k, k)) if s_max > 0 else np.zeros((k, k), dtype=int)
        stale[cols, cols] = 0
        stale[~updating] = 0
        times = np.maximum(t - stale, 0)
        new = p.copy()
        for i in np.flatnonzero(updating):
            view = p if s_max == 0 else history[times[i], cols]
            new[i] = fn(view)[i]
        last_update[updating] = t
        history[t + 1] = new
        updated_log.append(updating)
        stale_log.append(int(stale.max()))
        if not np.all(np.isfinite(new)) or np.max(new) > DIVERGENCE_LIMIT:
            reason = "divergence"
            break
        # stop only after a full horizon of quiet steps so stale reads cannot mask motion
        quiet = quiet + 1 if _stopped(p, new, tol) else 0
        p = new
        if quiet >= horizon:
            reason = "tol"
            break
    return IterationTrace(
        history[: len(stale_log) + 1].copy(), reason, mode=f"async-{schedule.mode}", seed=schedule.seed,
        schedule=schedule.describe(), updated=np.array(updated_log), staleness=np.array(stale_log),
    )


@dataclass(frozen=True)
class RateEstimate:
    rate: float
    window: tuple[int, int]
    usable: int
    inconclusive: bool = False

    @property
    def sublinear(self) -> bool:
        return not self.inconclusive and self.rate >= SUBLINEAR_RATE


def empirical_rate(trace: IterationTrace, p_star=None, v=None, fraction: float = 0.5,
                   min_steps: int = 10) -> RateEstimate:
    """Geometric rate from a least-squares fit of ln e(n) over the tail.

    Steps with e(n) <= 10 eps ||p*||_v are discarded; the fit uses the last
    ``fraction`` of the remaining ones.
    """
    if p_star is not None:
        trace.attach_errors(p_star, v if v is not None else trace.weights)
    if trace.errors is None:
        raise ValueError("trace has no errors; pass p_star")
    e = trace.errors
    floor = 10.0 * np.finfo(float).eps * np.max(np.abs(trace.p_star) / trace.weights)
    usable = np.flatnonzero(e > floor)
    # only the leading run of usable steps: the tail below the floor is noise
    if usable.size:
        gaps = np.flatnonzero(np.diff(usable) != 1)
        if gaps.size:
            usable = usable[: gaps[0] + 1]
    if usable.size < min_steps:
        return RateEstimate(math.nan, (0, 0), int(usable.size), inconclusive=True)
    start = usable[int(math.floor((1.0 - fraction) * usable.size))]
    stop = usable[-1]
    n = np.arange(start, stop + 1)
    slope = np.polyfit(n, np.log(e[start:stop + 1]), 1)[0]
    return RateEstimate(float(math.exp(slope)), (int(start), int(stop)), int(usable.size))


@dataclass(frozen=True)
class EnvelopeResult:
    passed: bool
    first_violation: int | None
    modulus: float
    bound: np.ndarray

    def __bool__(self) -> bool:
        return self.passed


def envelope_check(trace: IterationTrace, c: float, v=None, p_star=None, delay: int = 0) -> EnvelopeResult:
    """e(n) <= cbar^n e(0) (1 + 1e-9) at every step, cbar = c^(1/(D+1))."""
    if p_star is not None:
        trace.attach_errors(p_star, v)
    if trace.errors is None:
        raise ValueError("trace has no errors; pass p_star")
    cbar = c ** (1.0 / (delay + 1))
    e = trace.errors
    bound = e[0] * cbar ** np.arange(e.size)
    bad = np.flatnonzero(e > bound * (1.0 + ENVELOPE_RTOL))
    return EnvelopeResult(bad.size == 0, int(bad[0]) if bad.size else None, cbar, bound)


def measured_convergence_time(trace: IterationTrace, delta: float) -> int | None:
    """Smallest n with e(n) <= delta, or None if never reached."""
    if trace.errors is None:
        raise ValueError("trace has no errors")
    hit = np.flatnonzero(trace.errors <= delta)
    return int(hit[0]) if hit.size else None


@dataclass(frozen=True)
class DescentResult:
    passed: bool | None
    first_violation: int | None = None
    reason: str = ""


def monotone_descent_check(fn: InterferenceFunction, p_feasible, tol: float = 1e-12,
                           max_iter: int = 100_000) -> DescentResult:
    """From p' with I(p') <= p', iterates of a monotone I never increase."""
    if fn.kind not in ("standard", "contractive"):
        return DescentResult(None, reason=f"skipped: {fn.name} is not declared monotone")
    p_feasible = as_vec(p_feasible, "p'")
    if not np.all(fn(p_feasible) <= p_feasible):
        return DescentResult(None, reason="skipped: I(p') <= p' does not hold")
    trace = run_sync(fn, p_feasible, tol, max_iter)
    rises = np.flatnonzero(np.any(np.diff(trace.powers, axis=0) > 0, axis=1))
    if rises.size:
        return DescentResult(False, int(rises[0]) + 1, "iterate increased")
    return DescentResult(True)
