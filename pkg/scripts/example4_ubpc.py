"""Four-mobile UBPC scenario: certificate, synchronous run and error envelope.

    python3 scripts/example4_ubpc.py [--out DIR]

Writes example4_trace.csv (step, powers, weighted error, envelope) and prints
the certificate and bound checks.
"""
import argparse
import json
from pathlib import Path

import numpy as np

from ifc.cli import execute
from ifc.files import ScenarioFile

SCENARIO = Path(__file__).resolve().parents[1] / "scenarios" / "example4_ubpc.json"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/example4")
    args = ap.parse_args()
    report, trace, _ = execute(ScenarioFile.load(SCENARIO), args.out)
    cert = report["certificate"]
    print(f"method {cert['method']}: c = {cert['c']:.16g}, rho(M_b) = {cert['rho_Mb']:.16g}")
    print("v =", json.dumps(cert["v"]))
    print(f"converged in {report['steps']} steps ({report['stop_reason']})")
    print("p* =", json.dumps(report["p_star"]))
    print(f"envelope e(n) <= c^n e(0): {'holds' if report['envelope']['passed'] else 'VIOLATED'}")
    td = report["T_delta"]
    print(f"T_delta: measured {td['measured']} steps, bound {td['bound']:.2f} ({td['bound_steps']} steps)")
    print(f"empirical rate {report['empirical_rate']['rate']:.4f} vs rho(M_b) {report['rho']:.4f}")
    print(" n   err_weighted      envelope")
    envelope = trace.errors[0] * cert["c"] ** np.arange(trace.errors.size)
    for n, (e, b) in enumerate(zip(trace.errors, envelope)):
        print(f"{n:2d}  {e:14.6e}  {b:14.6e}")
    print("trace written to", report["trace"])


if __name__ == "__main__":
    main()
