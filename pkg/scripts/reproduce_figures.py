#!/usr/bin/env python3
"""Regenerate both figure overlays through the CLI presets.

    python3 scripts/reproduce_figures.py --scale 0.25 --out runs/figures

Scale 1 gives the native 1200x1200 panels; expect minutes per panel on one core.
Pass --c1-variant both to also render c1 = 1/4 + 1/256 next to the default 1/4 - 1/256.
"""

import argparse
import sys

from fixtemplate.cli import main as cli


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scale", default="0.25")
    ap.add_argument("--out", default="runs/figures")
    ap.add_argument("--c1-variant", default="minus", choices=["minus", "plus", "both"])
    ap.add_argument("--critical-times", default="all", choices=["all", "zero"])
    ap.add_argument("--workers", default=None)
    args = ap.parse_args()

    status = 0
    for fig in ("figure1", "figure2"):
        argv = [
            fig, "--scale", args.scale, "--out", f"{args.out}/{fig}",
            "--c1-variant", args.c1_variant, "--critical-times", args.critical_times,
        ]
        if args.workers:
            argv += ["--workers", args.workers]
        print(f"== {fig}", flush=True)
        status = max(status, cli(argv))
    return status


if __name__ == "__main__":
    sys.exit(main())
