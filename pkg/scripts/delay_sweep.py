"""Bounded-delay asynchronous runs on the four-mobile UBPC scenario.

    python3 scripts/delay_sweep.py [--delays 1 2 3 5 7 10] [--seeds 20] [--closed] [--out FILE]

For each delay bound D and seed, checks the c^(n/(D+1)) envelope and compares
the measured time to reach 1e-6 e(0) with the (D+1)-scaled bound.
"""
import argparse
import csv
import os

import numpy as np

from ifc.certify import certify_ubpc, convergence_steps_bound
from ifc.engine import AsyncSchedule, envelope_check, measured_convergence_time, reference_fixed_point, run_async
from ifc.zoo import example4, ubpc_if


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--delays", type=int, nargs="+", default=[1, 2, 3, 5, 7, 10])
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--closed", action="store_true", help="staleness up to D instead of D-1")
    ap.add_argument("--out", default="results/delay_sweep.csv")
    args = ap.parse_args()

    sc, params = example4()
    cert = certify_ubpc(sc, params)
    fn = ubpc_if(sc, params)
    p_star = reference_fixed_point(fn)
    rows = []
    print(f"c = {cert.modulus:.6f}")
    print(" D  envelope_ok  T_delta(min/mean/max)  bound")
    for d in args.delays:
        times, ok = [], True
        for seed in range(args.seeds):
            tr = run_async(fn, np.zeros(4), AsyncSchedule(delay=d, seed=seed, closed_window=args.closed), tol=1e-12)
            env = envelope_check(tr, cert.modulus, cert.weights, p_star, delay=d)
            e0 = tr.errors[0]
            t = measured_convergence_time(tr, 1e-6 * e0)
            bound = convergence_steps_bound(cert.modulus, e0, 1e-6 * e0, d)
            ok &= env.passed
            times.append(t)
            rows.append({"D": d, "seed": seed, "envelope_ok": env.passed, "T_delta": t,
                         "bound_steps": bound, "steps": tr.steps})
        print(f"{d:2d}  {str(ok):11s}  {min(times):4d} / {np.mean(times):6.1f} / {max(times):4d}      {bound}")
    if args.out:
        os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
        with open(args.out, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
        print("wrote", args.out)


if __name__ == "__main__":
    main()
