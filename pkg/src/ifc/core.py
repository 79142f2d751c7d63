"""Interference functions and sampling-based axiom checkers.

The checkers are falsifiers: a pass means no violation was found among the
seeded samples, a fail carries a counterexample that can be re-evaluated by
hand. Guarantees come from the certificates in :mod:`ifc.certify`.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .numkit import as_vec

KINDS = (
    "standard",
    "contractive",
    "two-sided-scalable",
    "two-sided-contractive",
    "unclassified",
)

# Relative slack for non-strict inequalities; absorbs rounding only.
RTOL = 1e-13


@dataclass(frozen=True)
class InterferenceFunction:
    """A map p -> I(p) on the nonnegative orthant with a declared class.

    ``modulus`` and ``weights`` hold (c, v) when the kind is one of the
    contractive variants.
    """

    dim: int
    evaluate: Callable[[np.ndarray], np.ndarray]
    name: str = "I"
    kind: str = "unclassified"
    modulus: float | None = None
    weights: np.ndarray | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")

    def __call__(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float).reshape(self.dim)
        out = np.asarray(self.evaluate(p), dtype=float).reshape(self.dim)
        return out

    def component(self, i: int, p) -> float:
        return float(self(p)[i])

    def with_certificate(self, modulus: float, weights, kind: str = "contractive") -> InterferenceFunction:
        return replace(self, kind=kind, modulus=float(modulus), weights=as_vec(weights, "v").copy())

    @property
    def is_contractive(self) -> bool:
        return self.kind in ("contractive", "two-sided-contractive") and self.modulus is not None


@dataclass
class AxiomVerdict:
    axiom: str
    passed: bool
    n_samples: int
    seed: int
    counterexample: dict | None = None

    def __bool__(self) -> bool:
        return self.passed

    def __str__(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        tail = "" if self.passed else f"  witness={_fmt_witness(self.counterexample)}"
        return f"{self.axiom:<24} {status}  (n={self.n_samples}, seed={self.seed}){tail}"


def _fmt_witness(w: dict | None) -> str:
    if not w:
        return "-"
    parts = []
    for k, val in w.items():
        if isinstance(val, np.ndarray):
            val = np.array2string(val, precision=6, separator=",")
        elif isinstance(val, float):
            val = f"{val:.6g}"
        parts.append(f"{k}={val}")
    return ", ".join(parts)


@dataclass(frozen=True)
class LogUniformSampler:
    """Draws power vectors with components log-uniform in [low, high]."""

    low: float = 1e-6
    high: float = 1e6

    def powers(self, rng: np.random.Generator, k: int) -> np.ndarray:
        return np.exp(rng.uniform(np.log(self.low), np.log(self.high), size=k))

    def scalar(self, rng: np.random.Generator, low: float, high: float) -> float:
        return float(np.exp(rng.uniform(np.log(low), np.log(high))))


DEFAULT_SAMPLER = LogUniformSampler()


def _exceeds(lhs, rhs) -> np.ndarray:
    """lhs > rhs beyond rounding slack, componentwise."""
    lhs = np.asarray(lhs)
    rhs = np.asarray(rhs)
    return lhs - rhs > RTOL * np.maximum(np.abs(lhs), np.abs(rhs))


def _points(probes: Iterable, draw: Callable[[], tuple], n_samples: int):
    for probe in probes:
        yield probe
    for _ in range(n_samples):
        yield draw()


def _evaluate(fn: InterferenceFunction, p: np.ndarray) -> np.ndarray:
    try:
        return fn(p)
    except Exception as exc:
        raise RuntimeError(f"{fn.name} failed at p={p!r}: {exc}") from exc


def check_positivity(
    fn: InterferenceFunction,
    sampler: LogUniformSampler = DEFAULT_SAMPLER,
    n_samples: int = 1000,
    seed: int = 0,
    probes: Sequence = (),
) -> AxiomVerdict:
    """I(p) > 0 at every sampled p >= 0, including p = 0."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    pts = [np.zeros(fn.dim), *[np.asarray(p, float).reshape(fn.dim) for p in probes]]
    for p in _points(pts, lambda: sampler.powers(rng, fn.dim), n_samples):
        out = _evaluate(fn, p)
        bad = np.flatnonzero(~(out > 0))
        if bad.size:
            return AxiomVerdict("positivity", False, n_samples, seed,
                                {"p": p, "I(p)": out, "i": int(bad[0])})
    return AxiomVerdict("positivity", True, n_samples, seed)


def check_monotonicity(
    fn: InterferenceFunction,
    sampler: LogUniformSampler = DEFAULT_SAMPLER,
    n_samples: int = 1000,
    seed: int = 0,
    probes: Sequence = (),
) -> AxiomVerdict:
    """p >= p' implies I(p) >= I(p') on sampled ordered pairs."""
    rng = np.random.default_rng(seed)
    k = fn.dim

    def draw():
        p = sampler.powers(rng, k)
        shrink = rng.uniform(0.0, 1.0, size=k)
        shrink[rng.random(k) < 0.25] = 1.0
        return p, p * shrink

    for p, q in _points(probes, draw, n_samples):
        p, q = np.asarray(p, float), np.asarray(q, float)
        ip, iq = _evaluate(fn, p), _evaluate(fn, q)
        bad = np.flatnonzero(_exceeds(iq, ip))
        if bad.size:
            return AxiomVerdict("monotonicity", False, n_samples, seed,
                                {"p": p, "p'": q, "i": int(bad[0])})
    return AxiomVerdict("monotonicity", True, n_samples, seed)


def check_scalability(
    fn: InterferenceFunction,
    sampler: LogUniformSampler = DEFAULT_SAMPLER,
    n_samples: int = 1000,
    seed: int = 0,
    alpha_max: float = 10.0,
    probes: Sequence = (),
) -> AxiomVerdict:
    """alpha I(p) > I(alpha p) for alpha in (1, alpha_max]; ties are violations."""
    rng = np.random.default_rng(seed)
    k = fn.dim

    def draw():
        return sampler.powers(rng, k), sampler.scalar(rng, 1.0 + 1e-6, alpha_max)

    for p, alpha in _points(probes, draw, n_samples):
        p = np.asarray(p, float).reshape(k)
        lhs = alpha * _evaluate(fn, p)
        rhs = _evaluate(fn, alpha * p)
        bad = np.flatnonzero(~(lhs > rhs))
        if bad.size:
            return AxiomVerdict("scalability", False, n_samples, seed,
                                {"p": p, "alpha": float(alpha), "i": int(bad[0])})
    return AxiomVerdict("scalability", True, n_samples, seed)


def check_contractivity(
    fn: InterferenceFunction,
    v,
    c: float,
    sampler: LogUniformSampler = DEFAULT_SAMPLER,
    n_samples: int = 1000,
    seed: int = 0,
    eps_min: float = 1e-8,
    eps_max: float = 100.0,
    probes: Sequence = (),
) -> AxiomVerdict:
    """I(p + eps v) <= I(p) + c eps v on sampled p >= 0 and eps > 0."""
    v = as_vec(v, "v")
    if v.size != fn.dim or np.any(v <= 0):
        raise ValueError("v must be positive with length dim")
    if not 0.0 <= c < 1.0:
        raise ValueError("c must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    k = fn.dim

    def draw():
        return sampler.powers(rng, k), sampler.scalar(rng, eps_min, eps_max)

    for p, eps in _points(probes, draw, n_samples):
        p = np.asarray(p, float).reshape(k)
        lhs = _evaluate(fn, p + eps * v)
        rhs = _evaluate(fn, p) + c * eps * v
        bad = np.flatnonzero(_exceeds(lhs, rhs))
        if bad.size:
            return AxiomVerdict("contractivity", False, n_samples, seed,
                                {"p": p, "eps": float(eps), "i": int(bad[0]), "c": c, "v": v})
    return AxiomVerdict("contractivity", True, n_samples, seed)


def check_two_sided_scalability(
    fn: InterferenceFunction,
    sampler: LogUniformSampler = DEFAULT_SAMPLER,
    n_samples: int = 1000,
    seed: int = 0,
    alpha_max: float = 10.0,
    probes: Sequence = (),
) -> AxiomVerdict:
    """p/alpha <= p' <= alpha p implies I(p)/alpha < I(p') < alpha I(p)."""
    rng = np.random.default_rng(seed)
    k = fn.dim

    def draw():
        p = sampler.powers(rng, k)
        alpha = sampler.scalar(rng, 1.0 + 1e-6, alpha_max)
        expo = rng.uniform(-1.0, 1.0, size=k)
        # the boundary of the box is where ties live
        edge = rng.random(k)
        expo[edge < 0.15] = 1.0
        expo[edge > 0.85] = -1.0
        return p, p * alpha ** expo, alpha

    for p, q, alpha in _points(probes, draw, n_samples):
        p, q = np.asarray(p, float), np.asarray(q, float)
        ip, iq = _evaluate(fn, p), _evaluate(fn, q)
        ok = (ip / alpha < iq) & (iq < alpha * ip)
        bad = np.flatnonzero(~ok)
        if bad.size:
            return AxiomVerdict("two-sided-scalability", False, n_samples, seed,
                                {"p": p, "p'": q, "alpha": float(alpha), "i": int(bad[0])})
    return AxiomVerdict("two-sided-scalability", True, n_samples, seed)


def check_two_sided_contractivity(
    fn: InterferenceFunction,
    v,
    c: float,
    sampler: LogUniformSampler = DEFAULT_SAMPLER,
    n_samples: int = 1000,
    seed: int = 0,
    eps_min: float = 1e-8,
    eps_max: float = 100.0,
    probes: Sequence = (),
) -> AxiomVerdict:
    """p' - eps v <= p <= p' + eps v implies |I(p) - I(p')| <= c eps v."""
    v = as_vec(v, "v")
    if v.size != fn.dim or np.any(v <= 0):
        raise ValueError("v must be positive with length dim")
    if not 0.0 <= c < 1.0:
        raise ValueError("c must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    k = fn.dim

    def draw():
        q = sampler.powers(rng, k)
        eps = sampler.scalar(rng, eps_min, eps_max)
        u = rng.uniform(-1.0, 1.0, size=k)
        edge = rng.random(k)
        u[edge < 0.15] = 1.0
        u[edge > 0.85] = -1.0
        p = np.maximum(q + eps * u * v, 0.0)
        return p, q, eps

    for p, q, eps in _points(probes, draw, n_samples):
        p, q = np.asarray(p, float), np.asarray(q, float)
        ip, iq = _evaluate(fn, p), _evaluate(fn, q)
        bad = np.flatnonzero(_exceeds(ip, iq + c * eps * v) | _exceeds(iq - c * eps * v, ip))
        if bad.size:
            return AxiomVerdict("two-sided-contractivity", False, n_samples, seed,
                                {"p": p, "p'": q, "eps": float(eps), "i": int(bad[0]), "c": c, "v": v})
    return AxiomVerdict("two-sided-contractivity", True, n_samples, seed)


def dc_metric(p, q) -> float:
    """max_i |ln(p_i / q_i)| for strictly positive vectors."""
    p, q = as_vec(p, "p"), as_vec(q, "p'")
    if p.size != q.size:
        raise ValueError("length mismatch")
    if np.any(p <= 0) or np.any(q <= 0):
        raise ValueError("d_c is only defined for strictly positive vectors")
    return float(np.max(np.abs(np.log(p) - np.log(q))))


def max_metric(p, q) -> float:
    return float(np.max(np.abs(as_vec(p) - as_vec(q))))


METRICS = {"dc": dc_metric, "max": max_metric}


def check_paracontraction(
    fn: InterferenceFunction,
    metric: str = "dc",
    sampler: LogUniformSampler = DEFAULT_SAMPLER,
    n_samples: int = 1000,
    seed: int = 0,
    probes: Sequence = (),
) -> AxiomVerdict:
    """d(I(p), I(p')) < d(p, p') strictly on sampled positive pairs p != p'."""
    dist = METRICS[metric]
    rng = np.random.default_rng(seed)
    k = fn.dim

    def draw():
        return sampler.powers(rng, k), sampler.powers(rng, k)

    for p, q in _points(probes, draw, n_samples):
        p, q = np.asarray(p, float), np.asarray(q, float)
        d_in = dist(p, q)
        if d_in == 0.0:
            continue
        d_out = dist(_evaluate(fn, p), _evaluate(fn, q))
        if not d_out < d_in:
            return AxiomVerdict(f"paracontraction[{metric}]", False, n_samples, seed,
                                {"p": p, "p'": q, "d_in": d_in, "d_out": d_out})
    return AxiomVerdict(f"paracontraction[{metric}]", True, n_samples, seed)


def lipschitz_ratio(fn: InterferenceFunction, p, q, v=None) -> float:
    """||I(p) - I(q)|| / ||p - q|| in the v-weighted max norm."""
    p, q = as_vec(p), as_vec(q)
    v = np.ones(fn.dim) if v is None else as_vec(v)
    num = np.max(np.abs(fn(p) - fn(q)) / v)
    den = np.max(np.abs(p - q) / v)
    return float(num / den)


class DomainError(ValueError):
    def __init__(self, message: str, witness):
        super().__init__(message)
        self.witness = witness


def log_transform(fn: InterferenceFunction) -> InterferenceFunction:
    """The map s -> ln I(e^s) in logarithmic power coordinates."""

    def evaluate(s):
        out = fn(np.exp(s))
        if np.any(out <= 0):
            raise DomainError(f"{fn.name} is not positive at p=exp(s)", np.exp(s))
        return np.log(out)

    return InterferenceFunction(fn.dim, evaluate, name=f"log[{fn.name}]", meta={"parent": fn})


def existence_test(fn: InterferenceFunction, p_feasible) -> bool:
    """True iff I(p') <= p' componentwise (exact comparison)."""
    q = as_vec(p_feasible, "p'")
    if q.size != fn.dim or np.any(q <= 0):
        raise ValueError("p' must be positive with length dim")
    return bool(np.all(fn(q) <= q))


def standard_axioms(fn: InterferenceFunction, n_samples: int = 1000, seed: int = 0,
                    sampler: LogUniformSampler = DEFAULT_SAMPLER) -> list[AxiomVerdict]:
    return [
        check_positivity(fn, sampler, n_samples, seed),
        check_monotonicity(fn, sampler, n_samples, seed),
        check_scalability(fn, sampler, n_samples, seed),
    ]
