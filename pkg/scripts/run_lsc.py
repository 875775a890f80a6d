#!/usr/bin/env python3
"""Empirical member-free radius around the counterexample parameter.

    python3 scripts/run_lsc.py                  # c1 = 1/4 - 1/256
    python3 scripts/run_lsc.py --plus-sign   # c1 = 1/4 + 1/256
"""

import argparse

from fixtemplate.dynamics import MembershipConfig
from fixtemplate.experiments import ProbeSpec, counterexample_constants, run_lsc_counterexample


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eps", type=float, default=1 / 256)
    ap.add_argument("--n-list", default="20,50,100,200")
    ap.add_argument("--radii", default="0.002,0.005,0.01,0.02")
    ap.add_argument("--samples", type=int, default=256)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--horizon", type=int, default=400)
    ap.add_argument("--plus-sign", action="store_true")
    args = ap.parse_args()

    k = counterexample_constants(args.eps, args.eps)
    probe = ProbeSpec(tuple(float(r) for r in args.radii.split(",")), args.samples, args.seed)
    c1 = 0.25 + args.eps if args.plus_sign else None
    rep = run_lsc_counterexample(
        k, [int(n) for n in args.n_list.split(",")], probe, MembershipConfig(args.horizon), c1=c1
    )
    print(f"alpha={k.alpha} beta={k.beta} check_9={k.check_9} (lhs {k.check_9_lhs})")
    print(f"center in limit set: {rep.results['center_limit_member']}")
    for row in rep.results["per_N"]:
        print(
            f"N={row['N']:>4}  center member={row['center_member']!s:5}  "
            f"members per radius={row['members_per_radius']}  eta_emp={row['eta_emp']}"
        )
    for name, c in rep.checks.items():
        print(("PASS" if c["passed"] else "FAIL"), name, c["value"])
    return 0 if rep.passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
