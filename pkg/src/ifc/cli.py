"""Command-line front end.

    ifc certify       --scenario FILE [--out DIR]
    ifc run           --scenario FILE [--out DIR]
    ifc check-axioms  --scenario FILE [--samples N] [--seed S] [--out DIR]
    ifc enumerate     --scenario FILE [--out DIR]

Exit codes: 0 success, 2 certification failure, 3 divergence, 4 parse error.
Logging verbosity comes from IFC_LOG_LEVEL (error, info, debug).
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import certify as cert_mod
from .certify import Certificate, CertificationError, convergence_steps_bound, convergence_time_bound
from .core import (
    InterferenceFunction,
    LogUniformSampler,
    check_contractivity,
    check_monotonicity,
    check_paracontraction,
    check_positivity,
    check_scalability,
    check_two_sided_contractivity,
    check_two_sided_scalability,
)
from .engine import (
    AsyncSchedule,
    IterationTrace,
    empirical_rate,
    envelope_check,
    measured_convergence_time,
    reference_fixed_point,
    run_async,
    run_sync,
)
from .files import ScenarioError, ScenarioFile
from .numkit import solve_linear_fixed_point
from .zoo import (
    build_normalized,
    clamp_if,
    drpc_if,
    linear_if,
    macro_diversity_if,
    macro_overestimate_if,
    min_power_if,
    scalar_fixtures,
    ubpc_if,
)

EXIT_OK, EXIT_CERT, EXIT_DIVERGED, EXIT_PARSE = 0, 2, 3, 4
DELTA_FRACTION = 1e-6
REFERENCE_MAX_ITER = 200_000

log = logging.getLogger("ifc")


@dataclass
class Built:
    """An interference function together with its certificate, if any."""

    fn: InterferenceFunction
    certificate: Certificate | None = None
    failure: CertificationError | None = None
    decisions: dict = field(default_factory=dict)
    p_star_exact: np.ndarray | None = None

    @property
    def modulus_weights(self):
        if self.certificate is not None:
            return self.certificate.modulus, self.certificate.weights
        if self.fn.is_contractive:
            return self.fn.modulus, self.fn.weights
        return None


def _certify_base(sf: ScenarioFile, family: str):
    """Return (function, certifier thunk, exact fixed point or None)."""
    alg = sf.algorithm
    sc = sf.network.scenario()
    nm = build_normalized(sc)
    if family == "linear":
        exact = None
        try:
            exact = solve_linear_fixed_point(nm.assigned, nm.noise_term)
        except ValueError:
            pass
        return linear_if(sc), lambda: cert_mod.certify_linear(nm.assigned), exact
    if family == "mpa":
        return min_power_if(sc), lambda: cert_mod.certify_mpa(sc), None
    if family == "macro":
        return macro_diversity_if(sc), lambda: cert_mod.certify_macro(sc, overestimate=False), None
    if family == "macro-over":
        return macro_overestimate_if(sc), lambda: cert_mod.certify_macro(sc, overestimate=True), None
    if family == "ubpc":
        params = alg.ubpc_params(sc.n_users)
        return ubpc_if(sc, params), lambda: cert_mod.certify_ubpc(sc, params), None
    if family == "drpc":
        unc = alg.uncertainty()
        if unc.upper.shape[0] != sc.n_users:
            raise ScenarioError("algorithm.upper", "dimension mismatch with network")
        return drpc_if(nm.noise_term, unc), lambda: cert_mod.certify_drpc(unc), None
    raise ScenarioError("algorithm.family", f"unknown family {family!r}")


def build(sf: ScenarioFile) -> Built:
    alg = sf.algorithm
    if alg.base_family == "fixture":
        fn = scalar_fixtures()[alg.fixture]
        built = Built(fn, failure=CertificationError("no-certifier", {"fixture": alg.fixture}, fn.name))
        fp = fn.meta.get("expected", {}).get("fixed_point")
        if fp is not None:
            built.p_star_exact = np.array([fp])
    else:
        fn, certifier, exact = _certify_base(sf, alg.base_family)
        built = Built(fn, p_star_exact=exact)
        sc = sf.network.scenario()
        built.decisions["assignment"] = (
            "strongest-server default (argmax_r G_ri)" if sc.default_assignment_used else "given"
        )
        built.decisions["assignment_used"] = (sc.bases() + 1).tolist()
        try:
            built.certificate = certifier()
            built.decisions["weights"] = "v from the certificate method " + built.certificate.method
        except CertificationError as exc:
            built.failure = exc
    if alg.clamped:
        built.fn = clamp_if(built.fn, alg.p_min, alg.p_max)
        built.p_star_exact = None
        if built.certificate is not None:
            built.certificate.family = f"clamped-{built.certificate.family}"
            built.fn = built.fn.with_certificate(built.certificate.modulus, built.certificate.weights)
    elif built.certificate is not None:
        built.fn = built.fn.with_certificate(built.certificate.modulus, built.certificate.weights)
    return built


def certificate_section(built: Built) -> dict:
    if built.certificate is not None:
        return {"status": "certified", **built.certificate.to_dict()}
    out = {"status": "failed", **built.failure.to_dict()}
    if built.fn.is_contractive:
        out["declared"] = {"c": built.fn.modulus, "v": built.fn.weights.tolist()}
    return out


def _fmt(x) -> str:
    return "" if x is None or (isinstance(x, float) and np.isnan(x)) else f"{x:.17g}"


def write_trace_csv(path: Path, trace: IterationTrace, envelope: np.ndarray | None) -> None:
    k = trace.powers.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", *[f"p_{i + 1}" for i in range(k)], "err_weighted", "envelope_bound"])
        for n, p in enumerate(trace.powers):
            err = trace.errors[n] if trace.errors is not None else None
            env = envelope[n] if envelope is not None else None
            w.writerow([n, *[_fmt(float(x)) for x in p], _fmt(err), _fmt(env)])


def _resolve_out(sf: ScenarioFile, out_dir: str | None, name: str) -> Path:
    path = Path(name)
    if out_dir is not None:
        path = Path(out_dir) / path.name
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _p_star(built: Built) -> np.ndarray | None:
    if built.p_star_exact is not None:
        return built.p_star_exact
    try:
        return reference_fixed_point(built.fn, max_iter=REFERENCE_MAX_ITER)
    except RuntimeError as exc:
        log.info("no reference fixed point: %s", exc)
        return None


def execute(sf: ScenarioFile, out_dir: str | None = None) -> tuple[dict, IterationTrace, int]:
    """Build, certify and run a scenario; write the CSV trace and JSON report."""
    built = build(sf)
    fn = built.fn
    run = sf.run
    p0 = np.zeros(fn.dim) if run.p0 is None else np.asarray(run.p0)
    delay = 0
    if run.mode == "async":
        sched = AsyncSchedule(mode=run.async_model, delay=run.D, seed=run.seed, window=run.window)
        trace = run_async(fn, p0, sched, run.tol, run.max_iter)
        delay = run.D if run.async_model == "bounded" else 0
    else:
        trace = run_sync(fn, p0, run.tol, run.max_iter)
    log.info("%s run stopped after %d steps: %s", trace.mode, trace.steps, trace.stop_reason)

    report = {
        "family": sf.algorithm.family,
        "K": fn.dim,
        "mode": trace.mode,
        "schedule": trace.schedule,
        "steps": trace.steps,
        "stop_reason": trace.stop_reason,
        "diverged": trace.diverged,
        "final_power": trace.final.tolist(),
        "certificate": certificate_section(built),
        "decisions": dict(built.decisions),
    }
    cv = built.modulus_weights
    weights = cv[1] if cv else np.ones(fn.dim)
    report["decisions"].setdefault(
        "weights", "v = 1 (no certificate)" if cv is None else "declared (c, v) of the fixture")
    envelope = None
    p_star = None if trace.diverged else _p_star(built)
    if p_star is not None:
        trace.attach_errors(p_star, weights)
        report["p_star"] = p_star.tolist()
        report["v"] = weights.tolist()
        rate = empirical_rate(trace)
        report["empirical_rate"] = {
            "rate": None if rate.inconclusive else rate.rate,
            "window": list(rate.window),
            "inconclusive": rate.inconclusive,
            "sublinear": rate.sublinear,
        }
        if built.certificate is not None:
            details = built.certificate.details
            report["rho"] = details.get("rho", details.get("rho_Mb"))
        if cv is not None:
            c = cv[0]
            env = envelope_check(trace, c, delay=delay)
            envelope = env.bound
            report["c"] = c
            report["envelope"] = {"passed": env.passed, "first_violation": env.first_violation,
                                  "cbar": env.modulus, "D": delay}
            e0 = float(trace.errors[0])
            if e0 > 0:
                delta = DELTA_FRACTION * e0
                measured = measured_convergence_time(trace, delta)
                bound = convergence_time_bound(c, e0, delta, delay)
                steps = convergence_steps_bound(c, e0, delta, delay)
                report["T_delta"] = {"delta": delta, "measured": measured, "bound": bound,
                                     "bound_steps": steps,
                                     "within_bound": measured is not None and measured <= steps}
    out_trace = _resolve_out(sf, out_dir, sf.output.trace)
    write_trace_csv(out_trace, trace, envelope)
    report["trace"] = str(out_trace)
    out_report = _resolve_out(sf, out_dir, sf.output.report)
    out_report.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    code = EXIT_DIVERGED if trace.diverged else EXIT_OK
    return report, trace, code


def cmd_certify(args) -> int:
    sf = ScenarioFile.load(args.scenario)
    built = build(sf)
    section = certificate_section(built)
    text = json.dumps({"certificate": section, "decisions": built.decisions}, indent=2, sort_keys=True)
    print(text)
    if args.out:
        _resolve_out(sf, args.out, "certificate.json").write_text(text + "\n")
    return EXIT_OK if built.certificate is not None else EXIT_CERT


def cmd_run(args) -> int:
    sf = ScenarioFile.load(args.scenario)
    report, _, code = execute(sf, args.out)
    summary = {k: report.get(k) for k in ("family", "mode", "steps", "stop_reason", "c", "envelope", "T_delta")}
    print(json.dumps(summary, indent=2, sort_keys=True))
    if report["diverged"]:
        print("DIVERGED: iterates exceeded the divergence threshold", file=sys.stderr)
    return code


def axiom_verdicts(built: Built, n_samples: int, seed: int):
    fn = built.fn
    probes = fn.meta.get("probes", {})
    sampler = fn.meta.get("sampler", LogUniformSampler())
    verdicts = [
        check_positivity(fn, sampler, n_samples, seed),
        check_monotonicity(fn, sampler, n_samples, seed),
        check_scalability(fn, sampler, n_samples, seed, probes=probes.get("scalability", ())),
        check_two_sided_scalability(fn, sampler, n_samples, seed),
        check_paracontraction(fn, "dc", sampler, n_samples, seed),
        check_paracontraction(fn, "max", sampler, n_samples, seed),
    ]
    cv = built.modulus_weights
    if cv is not None:
        c, v = cv
        verdicts.append(check_contractivity(fn, v, c, sampler, n_samples, seed,
                                            probes=probes.get("contractivity", ())))
        verdicts.append(check_two_sided_contractivity(fn, v, c, sampler, n_samples, seed))
    return verdicts


def cmd_check_axioms(args) -> int:
    sf = ScenarioFile.load(args.scenario)
    built = build(sf)
    verdicts = axiom_verdicts(built, args.samples, args.seed)
    print(f"axioms for {built.fn.name} (declared: {built.fn.kind})")
    for v in verdicts:
        print(str(v))
    if args.out:
        rows = [{"axiom": v.axiom, "passed": v.passed, "n_samples": v.n_samples, "seed": v.seed,
                 "counterexample": cert_mod._jsonable(v.counterexample)} for v in verdicts]
        _resolve_out(sf, args.out, "axioms.json").write_text(json.dumps(rows, indent=2) + "\n")
    return EXIT_OK


def cmd_enumerate(args) -> int:
    sf = ScenarioFile.load(args.scenario)
    if sf.network is None:
        raise ScenarioError("network", "enumeration needs a network block")
    nm = build_normalized(sf.network.scenario())
    mats = nm.macro if sf.algorithm.base_family == "macro-over" else nm.per_base
    try:
        spectra = cert_mod.enumerate_assignment_spectra(mats)
    except ValueError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_CERT
    lines = ["assignment,rho"]
    for l, rho in spectra:
        lines.append(f"{' '.join(str(b + 1) for b in l)},{rho:.17g}")
    worst = max(rho for _, rho in spectra)
    text = "\n".join(lines)
    print(text)
    print(f"max rho = {worst:.17g} ({'< 1: common v exists' if worst < 1 else '>= 1'})")
    if args.out:
        _resolve_out(sf, args.out, "spectra.csv").write_text(text + "\n")
    return EXIT_OK


def parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ifc", description="Contractive interference function toolkit")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn, help_ in (
        ("certify", cmd_certify, "produce or refute a contraction certificate"),
        ("run", cmd_run, "run the iteration and write trace CSV + report"),
        ("check-axioms", cmd_check_axioms, "sampled axiom verdict table"),
        ("enumerate", cmd_enumerate, "spectral radius of every assignment matrix"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--scenario", required=True, metavar="PATH")
        p.add_argument("--out", metavar="DIR")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--samples", type=int, default=1000)
        p.set_defaults(func=fn)
    return ap


def main(argv=None) -> int:
    level = os.environ.get("IFC_LOG_LEVEL", "error").upper()
    logging.basicConfig(level=getattr(logging, level, logging.ERROR), format="%(levelname)s %(name)s: %(message)s")
    args = parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"cannot read scenario: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
