"""Common weight vector versus exhaustive assignment spectra on random networks.

    python3 scripts/common_v_survey.py [--instances 500] [--seed 0]

For each random network (K <= 4 users, R <= 3 bases) compares the outcome of
the max-of-linear-maps iteration with max_l rho(M^l) over all R^K assignments.
"""
import argparse
from collections import Counter

import numpy as np

from ifc.certify import CertificationError, certify_common_v, enumerate_assignment_spectra
from ifc.zoo import build_normalized, random_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--instances", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    tally = Counter()
    margins = []
    for i in range(args.instances):
        rng = np.random.default_rng([args.seed, i])
        k, r = int(rng.integers(2, 5)), int(rng.integers(1, 4))
        sc = random_scenario(rng, k, r, cross=rng.uniform(0.05, 0.6), target_db=(-8.0, 2.0))
        ms = build_normalized(sc).per_base
        worst = max(rho for _, rho in enumerate_assignment_spectra(ms))
        try:
            cert = certify_common_v(ms)
            outcome = "certified"
            assert cert.modulus < 1
        except CertificationError as exc:
            outcome = exc.reason
        agree = (outcome == "certified") == (worst < 1)
        tally[(worst < 1, outcome, agree)] += 1
        margins.append(abs(worst - 1))
    print("max rho < 1 | common-v outcome            | agree | count")
    for (feasible, outcome, agree), n in sorted(tally.items()):
        print(f"{str(feasible):11s} | {outcome:27s} | {str(agree):5s} | {n}")
    print(f"closest max rho to 1: {min(margins):.3e}")


if __name__ == "__main__":
    main()
