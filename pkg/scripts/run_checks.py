#!/usr/bin/env python3
"""Boundedness, invariance and constants checks in one go (seconds on one core)."""

from fixtemplate.experiments import (
    constants_grid_report,
    random_system,
    verify_boundedness,
    verify_invariance,
)


def main():
    reports = [constants_grid_report(), verify_boundedness(1000, (1, 2, 3), 4, seed=0)]
    for k in range(5):
        p, t = random_system(42, k)
        reports.append(verify_invariance(2000, p, t, 200, seed=42 + k))
    for rep in reports:
        for name, c in rep.checks.items():
            print(f"{'PASS' if c['passed'] else 'FAIL'} {rep.experiment}.{name}: {c['value']}")
    return 0 if all(r.passed for r in reports) else 1


if __name__ == "__main__":
    raise SystemExit(main())
