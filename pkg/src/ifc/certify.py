"""Contraction certificates (c, v) for the zoo families.

A certificate is a modulus ``c < 1`` and a weight vector ``v > 0`` such that
every covered nonnegative matrix A satisfies ``A v <= c v`` row by row. Failed
certification raises :class:`CertificationError` with a reproducible witness.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .numkit import (
    CertificateImpossible,
    as_mat,
    spectral_radius,
    weight_vector_for,
    weighted_max_norm_mat,
)
from .zoo import IntervalUncertainty, NetworkScenario, UbpcParams, build_normalized

SLACK = 1e-9
COMMON_V_MAX_ITER = 100_000
COMMON_V_DIVERGENCE = 1e12
COMMON_V_RTOL = 1e-13
ENUMERATION_CAP = 10**6

METHODS = ("perron-solve", "row-sum", "common-v", "assignment-enumeration", "ubpc-Mb", "drpc-sup")


@dataclass
class Certificate:
    modulus: float
    weights: np.ndarray
    method: str
    family: str
    matrices: list[np.ndarray] = field(default_factory=list, repr=False)
    details: dict = field(default_factory=dict)

    def verify(self, slack: float = SLACK) -> bool:
        """Re-check A v <= c v for every covered matrix."""
        if not (0.0 <= self.modulus < 1.0) or np.any(self.weights <= 0):
            return False
        v = self.weights
        return all(np.all(a @ v <= self.modulus * v + slack * v) for a in self.matrices)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "method": self.method,
            "c": self.modulus,
            "v": self.weights.tolist(),
            **{k: _jsonable(val) for k, val in self.details.items()},
        }


class CertificationError(Exception):
    """Certification failed; ``reason`` and ``witness`` reproduce the failure."""

    def __init__(self, reason: str, witness: dict, family: str = ""):
        super().__init__(f"{family or 'certificate'}: {reason}")
        self.reason = reason
        self.witness = witness
        self.family = family

    def to_dict(self) -> dict:
        return {"family": self.family, "failure": self.reason,
                **{k: _jsonable(v) for k, v in self.witness.items()}}


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, (list, tuple)):
        return [_jsonable(y) for y in x]
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    return x


def _zero_diagonal_nonneg(m) -> np.ndarray:
    m = as_mat(m, "M")
    if np.any(m < 0):
        raise ValueError("matrix must be nonnegative")
    return m


def certify_linear(m, family: str = "linear", method: str = "perron-solve") -> Certificate:
    """v = (I - M)^{-1} 1 and c = ||M||_v when rho(M) < 1."""
    m = _zero_diagonal_nonneg(m)
    try:
        v = weight_vector_for(m)
    except CertificateImpossible as exc:
        raise CertificationError("spectral-radius>=1", {"rho": exc.rho}, family) from None
    c = weighted_max_norm_mat(m, v)
    rho = spectral_radius(m)
    if c >= 1.0:
        raise CertificationError("spectral-radius>=1", {"rho": rho, "c": c}, family)
    return Certificate(c, v, method, family, [m], {"rho": rho})


def certify_linear_rowsum(m, family: str = "linear") -> Certificate:
    """v = 1; succeeds iff every row sum of M is below one."""
    m = _zero_diagonal_nonneg(m)
    sums = m.sum(axis=1)
    c = float(sums.max())
    if c >= 1.0:
        raise CertificationError("row-sum>=1", {"row_sums": sums, "row": int(sums.argmax())}, family)
    return Certificate(c, np.ones(m.shape[0]), "row-sum", family, [m], {"row_sums": sums})


def _stack(matrices) -> np.ndarray:
    ms = np.asarray(matrices, dtype=float)
    if ms.ndim == 2:
        ms = ms[None]
    if ms.ndim != 3 or ms.shape[1] != ms.shape[2]:
        raise ValueError("expected a sequence of square matrices")
    if np.any(ms < 0):
        raise ValueError("matrices must be nonnegative")
    return ms


def certify_common_v(matrices, family: str = "mpa", max_iter: int = COMMON_V_MAX_ITER) -> Certificate:
    """Common weight vector for M_1..M_R via v <- max_r(M_r v) + 1 from v = 1.

    The iteration is monotone and converges exactly when every row-mixed
    matrix M^l has spectral radius below one.
    """
    ms = _stack(matrices)
    k = ms.shape[1]
    v = np.ones(k)
    for it in range(1, max_iter + 1):
        new = np.max(ms @ v, axis=0) + 1.0
        if new.max() > COMMON_V_DIVERGENCE:
            raise CertificationError("common-v-diverged", {"iterations": it, "norm": float(new.max())}, family)
        done = np.max(np.abs(new - v)) <= COMMON_V_RTOL * new.max()
        v = new
        if done:
            break
    else:
        raise CertificationError("common-v-inconclusive",
                                 {"iterations": max_iter, "v": v, "norm": float(v.max())}, family)
    norms = [weighted_max_norm_mat(m, v) for m in ms]
    c = max(norms)
    if c >= 1.0:
        raise CertificationError("common-v-not-contractive", {"c": c, "v": v}, family)
    return Certificate(c, v, "common-v", family, list(ms), {"per_matrix_c": norms, "iterations": it})


def assignment_matrix(matrices, assignment) -> np.ndarray:
    """Row i taken from M_{l(i)}."""
    ms = _stack(matrices)
    idx = np.asarray(assignment, dtype=int)
    return ms[idx, np.arange(ms.shape[1]), :]


def enumerate_assignment_spectra(matrices, cap: int = ENUMERATION_CAP, radius=spectral_radius):
    """All assignments l in {0..R-1}^K with rho(M^l), in lexicographic order."""
    ms = _stack(matrices)
    r, k = ms.shape[0], ms.shape[1]
    if r**k > cap:
        raise ValueError(f"{r}^{k} assignments exceed the enumeration cap {cap}")
    return [
        (l, radius(assignment_matrix(ms, l)))
        for l in itertools.product(range(r), repeat=k)
    ]


def certify_by_enumeration(matrices, family: str = "mpa", cap: int = ENUMERATION_CAP) -> Certificate:
    """Check max_l rho(M^l) < 1 exhaustively, then build v with the common-v iteration."""
    spectra = enumerate_assignment_spectra(matrices, cap)
    worst_l, worst = max(spectra, key=lambda t: t[1])
    if worst >= 1.0:
        raise CertificationError("enumeration-found-bad-assignment",
                                 {"assignment": list(worst_l), "rho": worst}, family)
    cert = certify_common_v(matrices, family)
    cert.method = "assignment-enumeration"
    cert.details["max_assignment_rho"] = worst
    return cert


def certify_mpa(sc: NetworkScenario) -> Certificate:
    return certify_common_v(build_normalized(sc).per_base, "mpa")


def certify_macro(sc: NetworkScenario, overestimate: bool = True) -> Certificate:
    """Common-v certificate on H_r (overestimate) or M_r (exact form).

    The row-sum condition ||H_r|| < 1 for all r is reported alongside for
    comparison; it is sufficient but more conservative.
    """
    nm = build_normalized(sc)
    family = "macro-over" if overestimate else "macro"
    mats = nm.macro if overestimate else nm.per_base
    rowsum = float(mats.sum(axis=2).max())
    try:
        cert = certify_common_v(mats, family)
    except CertificationError as exc:
        exc.witness["rowsum_norm"] = rowsum
        raise
    cert.details["rowsum_norm"] = rowsum
    cert.details["rowsum_condition"] = rowsum < 1.0
    return cert


def certify_ubpc(sc: NetworkScenario, params: UbpcParams) -> Certificate:
    """Certificate on M_b = diag(b) M; c = ||M_b||_v with v = (I - M_b)^{-1} 1.

    The b-bound on the inverse marginal utility only holds where the inverse
    sits at its peak, i.e. alpha_i x_i >= a_i / 4. Since x >= N on the
    orthant, alpha_i N_i >= a_i / 4 for all i is required.
    """
    nm = build_normalized(sc)
    b = params.midpoints(sc.targets)
    m_b = b[:, None] * nm.assigned
    peak_gap = params.alpha * nm.noise_term - params.a / 4.0
    if np.any(peak_gap < 0):
        i = int(np.argmin(peak_gap))
        raise CertificationError(
            "parameter-domain",
            {"user": i, "alpha_N": float(params.alpha[i] * nm.noise_term[i]),
             "peak": float(params.a[i] / 4.0)},
            "ubpc",
        )
    cert = certify_linear(m_b, family="ubpc", method="ubpc-Mb")
    cert.details["rho_Mb"] = cert.details.pop("rho")
    cert.details["b"] = b
    return cert


def certify_drpc(unc: IntervalUncertainty) -> Certificate:
    """For box uncertainty the sup of ||M||_v is attained at the upper bound."""
    cert = certify_linear(unc.upper, family="drpc", method="drpc-sup")
    cert.details["rho_lower"] = spectral_radius(unc.lower)
    return cert


def convergence_time_bound(c: float, r0: float, delta: float, delay: int = 0) -> float:
    """(D + 1) ln(delta / R0) / ln(c): steps until the c^n envelope drops below delta.

    Returns inf as c -> 1 and 0 for c == 0.
    """
    if not 0.0 <= c < 1.0:
        raise ValueError("c must lie in [0, 1)")
    if not 0 < delta < r0:
        raise ValueError("need 0 < delta < R0")
    if delay < 0 or int(delay) != delay:
        raise ValueError("D must be a nonnegative integer")
    if c == 0.0:
        return 0.0
    log_c = math.log(c)
    if log_c == 0.0:
        return math.inf
    return (delay + 1) * math.log(delta / r0) / log_c


def convergence_steps_bound(c: float, r0: float, delta: float, delay: int = 0) -> int:
    """Integer form of :func:`convergence_time_bound`: the first step n >= 1 at
    which the envelope e(0) cbar^n is at most delta."""
    bound = convergence_time_bound(c, r0, delta, delay)
    return max(1, math.ceil(bound)) if math.isfinite(bound) else math.inf
