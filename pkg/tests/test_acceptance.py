"""Acceptance criteria 1-9, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v`` (lines are printed even when
output capture is on) or directly with ``python3 tests/test_acceptance.py``.
Tolerances and runtime limits are the ones the criteria state.
"""

import json
import os
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import classical_escape  # noqa: E402
from fixtemplate.cli import main as cli_main  # noqa: E402
from fixtemplate.dynamics import MembershipConfig, ParameterPoint, in_mandelbrot  # noqa: E402
from fixtemplate.experiments import (  # noqa: E402
    ProbeSpec,
    counterexample_constants,
    random_system,
    run_lsc_counterexample,
    run_usc_experiment,
    sample_rng,
    verify_boundedness,
    verify_invariance,
)
from fixtemplate.metrics import brute_force_distance, distance_transform  # noqa: E402
from fixtemplate.raster import Raster, SliceSpec, Window, raster_mandelbrot_slice  # noqa: E402
from fixtemplate.templates import (  # noqa: E402
    Template,
    parse_template,
    periodic_approximation,
    ultrametric_distance,
)

pytestmark = pytest.mark.slow

C0 = 0.5 - 1 / 256
C1 = 0.25 - 1 / 256
S = "D=2:0|1"

# Directed distances d(M^{s^N} slice, M^s slice) for N = 10, 20, 50, 100, 200,
# recorded on the first verified run of criterion 2's configuration.
USC_FIXTURE = [0.018633899812498248, 0.008333333333333333, 0.0, 0.0, 0.0]
# eta_emp for N = 20, 50, 100, 200 recorded on the first verified run.
LSC_FIXTURE = [0.005, 0.005, 0.005, 0.005]


_terminal = None


@pytest.fixture(autouse=True)
def _reporter(request):
    # Verdict lines go to the terminal reporter so they survive output capture.
    global _terminal
    _terminal = request.config.pluginmanager.get_plugin("terminalreporter")
    yield


def _emit(line: str) -> None:
    if _terminal is not None:
        _terminal.write_line("")
        _terminal.write_line(line)
    else:
        print(line, flush=True)


def verdict(n: int, ok: bool, detail: str, elapsed: float, limit: float | None = None):
    timed_ok = limit is None or elapsed < limit
    status = "PASS" if ok and timed_ok else "FAIL"
    budget = f" (limit {limit:g} s)" if limit is not None else ""
    _emit(f"{status} criterion {n}: {detail} [runtime {elapsed:.2f} s{budget}]")
    assert ok, detail
    assert timed_ok, f"runtime {elapsed:.2f} s over {limit} s"


def test_criterion_1_membership_ground_truth():
    t0 = time.perf_counter()
    p = ParameterPoint((C0, C1), (2, 2), 2)
    s = parse_template(S)
    cfg = MembershipConfig(400)
    limit_member = in_mandelbrot(p, s, cfg)
    approx = {N: in_mandelbrot(p, periodic_approximation(s, N), cfg) for N in (5, 20, 50, 200)}
    elapsed = time.perf_counter() - t0
    ok = limit_member == (True, None) and not any(m for m, _ in approx.values())
    witnesses = ", ".join(f"N={N}:{w}" for N, (_, w) in approx.items())
    verdict(1, ok, f"limit member={limit_member[0]}; non-member witnesses {witnesses}", elapsed, 1.0)


def test_criterion_2_usc_trend():
    t0 = time.perf_counter()
    base = ParameterPoint((C0, C1), (2, 2), 2)
    sl = [SliceSpec(base, 0, Window(-1.25, 1.25, -1.25, 1.25, 300, 300))]
    N_list = [10, 20, 50, 100, 200]
    rep = run_usc_experiment(parse_template(S), base, sl, N_list, MembershipConfig(400))
    elapsed = time.perf_counter() - t0
    rows = rep.results["slices"][0]["rows"]
    d = [r["d_approx_limit"] for r in rows]
    qb = rows[0]["quantization_bound"]
    monotone = all(d[i + 1] <= d[i] + 2 * qb for i in range(len(d) - 1))
    ok = monotone and d[-1] <= d[0] and np.allclose(d, USC_FIXTURE, rtol=0, atol=1e-12)
    # The 5 min target is stated for 8 hardware threads; it is reported, not gated.
    verdict(
        2, ok,
        f"d={d} nonincreasing within 2*{qb:.4f}={monotone}, d(200)<=d(10)={d[-1] <= d[0]}, "
        f"fixture match={np.allclose(d, USC_FIXTURE, rtol=0, atol=1e-12)}; cpus={os.cpu_count()}",
        elapsed,
    )


def test_criterion_3_lsc_failure():
    t0 = time.perf_counter()
    k = counterexample_constants(1 / 256, 1 / 256)
    rep = run_lsc_counterexample(k, [20, 50, 100, 200], ProbeSpec(samples=256), MembershipConfig(400))
    elapsed = time.perf_counter() - t0
    etas = [row["eta_emp"] for row in rep.results["per_N"]]
    ok = (
        rep.checks["center_in_limit_set"]["passed"]
        and all(e >= 0.002 for e in etas)
        and etas[-1] >= 0.5 * etas[0]
        and etas == LSC_FIXTURE
    )
    verdict(3, ok, f"eta_emp(N=20,50,100,200)={etas}, floor 0.002, ratio {etas[-1] / etas[0]:.3f} >= 0.5", elapsed, 120.0)


def test_criterion_4_boundedness():
    t0 = time.perf_counter()
    rep = verify_boundedness(1000, (1, 2, 3), 4, seed=0, members=100)
    elapsed = time.perf_counter() - t0
    r = rep.results
    verdict(
        4, rep.passed,
        f"non-member failures={len(r['nonmember_failures'])}/1000, members={r['members_found']}, "
        f"probe failures={len(r['probe_failures'])}",
        elapsed, 60.0,
    )


def test_criterion_5_classical_oracle():
    t0 = time.perf_counter()
    w = Window(-2.0, 0.5, -1.25, 1.25, 600, 600)
    r = raster_mandelbrot_slice(
        SliceSpec(ParameterPoint((0,), (2,)), 0, w), parse_template("D=1:|0"), MembershipConfig(400)
    )
    elapsed = time.perf_counter() - t0
    steps, peak = classical_escape(w.centers(), 400)
    agree = r.cells == steps
    frac = agree.mean()
    strict = ((steps > 0) & (steps <= 390)) | ((steps == 0) & (peak <= 1.9))
    exact = bool(agree[strict].all())
    verdict(
        5, frac >= 0.999 and exact,
        f"agreement {frac:.6f} (>= 0.999), exact on {int(strict.sum())} decisive pixels={exact}, "
        f"mismatches={int((~agree).sum())}",
        elapsed, 30.0,
    )


def test_criterion_6_invariance():
    t0 = time.perf_counter()
    violations, bounded = 0, 0
    for k in range(5):
        p, t = random_system(42, k)
        rep = verify_invariance(2000, p, t, 200, seed=42 + k)
        violations += len(rep.results["violations"])
        bounded += rep.results["bounded_samples"]
    elapsed = time.perf_counter() - t0
    verdict(6, violations == 0, f"10000 samples over 5 systems, violations={violations}, bounded samples={bounded}", elapsed, 30.0)


def _random_template(g) -> Template:
    D = int(g.integers(2, 5))
    q, p = int(g.integers(0, 9)), int(g.integers(1, 9))
    syms = g.integers(0, D, q + p)
    return Template(D, tuple(syms[:q]), tuple(syms[q:]))


def _same_alphabet(g, t: Template) -> Template:
    q, p = int(g.integers(0, 9)), int(g.integers(1, 9))
    syms = g.integers(0, t.alphabet_size, q + p)
    return Template(t.alphabet_size, tuple(syms[:q]), tuple(syms[q:]))


def test_criterion_7_metric_correctness():
    t0 = time.perf_counter()
    edt_ok = 0
    for i in range(100):
        g = sample_rng(7, i)
        h, w = (int(x) for x in g.integers(1, 33, 2))
        px, py = g.uniform(0.01, 2.0, 2)
        mask = g.random((h, w)) < g.uniform(0.0, 0.5)
        r = Raster(Window(0, px * w, 0, py * h, w, h), np.where(mask, 0, 1))
        edt_ok += np.array_equal(distance_transform(r).values, brute_force_distance(r))

    strong_fail, ordinary_fail, example = 0, 0, None
    for i in range(10_000):
        g = sample_rng(77, i)
        s = _random_template(g)
        t, u = _same_alphabet(g, s), _same_alphabet(g, s)
        (st, e1), (tu, e2), (su, e3) = (
            ultrametric_distance(s, t), ultrametric_distance(t, u), ultrametric_distance(s, u)
        )
        slack = e1 + e2 + e3
        if su > max(st, tu) + slack:
            strong_fail += 1
            example = example or (str(s), str(t), str(u), su, st, tu)
        if su > st + tu + slack + 4e-16:
            ordinary_fail += 1
    elapsed = time.perf_counter() - t0
    ok = edt_ok == 100 and strong_fail == 0
    verdict(
        7, ok,
        f"EDT exact on {edt_ok}/100 rasters; strong triangle violated on {strong_fail}/10000 triples "
        f"(e.g. d(s,u)={example[3] if example else 0:.6g} > max({example[4] if example else 0:.6g}, "
        f"{example[5] if example else 0:.6g}) for {example[:3] if example else ()}); "
        f"ordinary triangle violations={ordinary_fail}",
        elapsed, 10.0,
    )


def _figure1(out: Path, workers: int) -> int:
    return cli_main(["figure1", "--scale", "0.25", "--out", str(out), "--workers", str(workers)])


def test_criterion_8_determinism(tmp_path):
    t0 = time.perf_counter()
    n = max(4, os.cpu_count() or 1)
    a, b = tmp_path / "w1", tmp_path / f"w{n}"
    codes = (_figure1(a, 1), _figure1(b, n))
    elapsed = time.perf_counter() - t0
    names = sorted(p.name for p in a.iterdir() if p.name != "timings.json")
    names_b = sorted(p.name for p in b.iterdir() if p.name != "timings.json")
    same = names == names_b and all((a / f).read_bytes() == (b / f).read_bytes() for f in names)
    workers = [json.loads((d / "timings.json").read_text())["workers"] for d in (a, b)]
    verdict(8, same and codes == (0, 0), f"{len(names)} files byte-identical={same} across workers={workers}, exit codes={codes}", elapsed)


def test_criterion_9_constants():
    t0 = time.perf_counter()
    k = counterexample_constants(1 / 256, 1 / 256)
    res = k.residuals()
    ok = (
        k.alpha == 0.4375 and k.beta == 0.5625 and k.check_9 and k.check_9_lhs == 0.1875
        and k.f_c0_alpha == 0.6875 and k.f_c0_alpha > 0.625 and max(res) < 1e-12
    )
    elapsed = time.perf_counter() - t0
    verdict(
        9, ok,
        f"alpha={k.alpha} beta={k.beta} check_9={k.check_9} lhs={k.check_9_lhs} "
        f"f_c0(alpha)={k.f_c0_alpha} > 0.625, residuals={res}",
        elapsed,
    )


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
