"""Finite-resolution evidence for the semicontinuity and boundedness results.

Every random draw comes from :func:`sample_rng`, a Philox stream keyed by
``(seed, sample index)``, so results do not depend on evaluation order.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .dynamics import (
    MembershipConfig,
    ParameterPoint,
    classify_orbit,
    compose,
    escape_radius,
    format_parameter,
    in_mandelbrot,
)
from .metrics import directed_distance, hausdorff_distance, quantization_bound
from .raster import SliceSpec, Window, raster_mandelbrot_slice
from .templates import Template, format_template, is_full, parse_template, periodic_approximation

log = logging.getLogger(__name__)

LIMIT_TEMPLATE = "D=2:0|1"
LOG_GRID_EPS = tuple(2.0 ** -k for k in range(3, 41))


def sample_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[seed & (2**64 - 1), index]))


@dataclass
class ExperimentReport:
    experiment: str
    config: dict
    results: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def check(self, name: str, passed: bool, value=None, tolerance=None) -> bool:
        self.checks[name] = {"passed": bool(passed), "value": value, "tolerance": tolerance}
        return bool(passed)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks.values())

    def to_dict(self, timing: bool = False) -> dict:
        out = {
            "experiment": self.experiment,
            "config": self.config,
            "results": self.results,
            "checks": self.checks,
            "passed": self.passed,
        }
        if timing:
            out["wall_time"] = self.wall_time
        return out


# -- counterexample constants ------------------------------------------------


@dataclass(frozen=True)
class CounterexampleConstants:
    eps0: float
    eps1: float
    c0: float
    c1: float
    alpha: float
    beta: float
    multiplier: float
    f_c0_alpha: float
    check_9_lhs: float
    check_9: bool
    check_10: bool

    @property
    def parameter(self) -> ParameterPoint:
        return ParameterPoint((self.c0, self.c1), (2, 2), 2)

    def residuals(self) -> tuple[float, float]:
        return (
            abs(self.alpha**2 + self.c1 - self.alpha),
            abs(self.beta**2 + self.c1 - self.beta),
        )


def counterexample_constants(eps0: float, eps1: float) -> CounterexampleConstants:
    for name, eps in (("eps0", eps0), ("eps1", eps1)):
        if not 0 < eps <= 0.125:
            raise ValueError(f"{name}={eps} outside (0, 1/8]")
    r = math.sqrt(eps1)
    alpha, beta = 0.5 - r, 0.5 + r
    lhs = 3 * r - eps1 + eps0
    f_alpha = alpha * alpha + 0.5 - eps0
    return CounterexampleConstants(
        eps0=eps0,
        eps1=eps1,
        c0=0.5 - eps0,
        c1=0.25 - eps1,
        alpha=alpha,
        beta=beta,
        multiplier=1 - 2 * r,
        f_c0_alpha=f_alpha,
        check_9_lhs=lhs,
        check_9=lhs < 0.25,
        check_10=f_alpha > beta + r,
    )


def constants_grid_report(grid=LOG_GRID_EPS) -> ExperimentReport:
    """Fixed-point residuals, and check_9 implying check_10, on an eps grid."""
    rep = ExperimentReport("constants", {"grid": list(grid)})
    worst, broken = 0.0, []
    for e0 in grid:
        for e1 in grid:
            k = counterexample_constants(e0, e1)
            worst = max(worst, *k.residuals())
            if k.check_9 and not k.check_10:
                broken.append((e0, e1))
    rep.results = {"max_residual": worst, "implication_failures": broken}
    rep.check("fixed_point_residual", worst < 1e-12, worst, 1e-12)
    rep.check("check9_implies_check10", not broken, len(broken), 0)
    return rep


# -- upper semicontinuity ----------------------------------------------------


def run_usc_experiment(
    s: Template,
    base: ParameterPoint,
    slices: list[SliceSpec],
    N_list: list[int],
    cfg: MembershipConfig = MembershipConfig(),
    workers: int | None = None,
    keep: dict | None = None,
) -> ExperimentReport:
    """Directed distance from each periodic approximation's slice to the limit slice.

    Rasters are stored into ``keep`` (keyed ``(slice index, N or None)``)
    when a dict is supplied.
    """
    t0 = time.perf_counter()
    rep = ExperimentReport(
        "usc",
        {
            "template": format_template(s),
            "base": format_parameter(base),
            "slices": [
                {"vary": sl.varying_coordinate, "window": list(sl.window.as_tuple())}
                for sl in slices
            ],
            "N_list": list(N_list),
            "horizon": cfg.max_iterations,
            "critical_times": cfg.critical_times,
        },
    )
    if not is_full(s):
        log.warning("template %s is not full; convergence is only expected for full templates", s)
        rep.results["warning"] = "template not full"
    rep.results["slices"] = []
    for idx, sl in enumerate(slices):
        limit = raster_mandelbrot_slice(sl, s, cfg, workers)
        if keep is not None:
            keep[(idx, None)] = limit
        qb = quantization_bound(sl.window)
        rows = []
        for N in N_list:
            approx = raster_mandelbrot_slice(sl, periodic_approximation(s, N), cfg, workers)
            if keep is not None:
                keep[(idx, N)] = approx
            rows.append(
                {
                    "N": N,
                    "d_approx_limit": directed_distance(approx, limit),
                    "d_H": hausdorff_distance(approx, limit),
                    "quantization_bound": qb,
                    "inside_approx": int(approx.inside.sum()),
                    "inside_limit": int(limit.inside.sum()),
                }
            )
        rep.results["slices"].append({"vary": sl.varying_coordinate, "rows": rows})
        d = [r["d_approx_limit"] for r in rows]
        monotone = all(d[i + 1] <= d[i] + 2 * qb for i in range(len(d) - 1))
        rep.check(f"slice{idx}_nonincreasing", monotone, d, 2 * qb)
        final_ok = d[-1] <= 2 * qb or d[-1] < d[0]
        rep.check(f"slice{idx}_final", final_ok, d[-1], 2 * qb)
    rep.wall_time = time.perf_counter() - t0
    return rep


def usc_slices(base: ParameterPoint, scale: float = 1.0) -> list[SliceSpec]:
    """The two full-view slices: c0 over [-1.25,1.25]^2, c1 over [-1.5,0.5]x[-1,1]."""
    n = max(1, round(1200 * scale))
    return [
        SliceSpec(base, 0, Window(-1.25, 1.25, -1.25, 1.25, n, n)),
        SliceSpec(base, 1, Window(-1.5, 0.5, -1.0, 1.0, n, n)),
    ]


# -- lower semicontinuity failure ---------------------------------------------


@dataclass(frozen=True)
class ProbeSpec:
    radii: tuple[float, ...] = (0.002, 0.005, 0.01, 0.02)
    samples: int = 256
    seed: int = 0


def sphere_samples(center: tuple[complex, complex], r: float, n: int, seed: int, tag: int) -> np.ndarray:
    """``n`` points on the max-metric sphere of radius ``r`` in C^2.

    Samples cycle through three patterns (both coordinates on the circle, only
    c0 on it, only c1 on it); the other coordinate fills the closed disc.
    Angles are stratified over ``n`` sectors with jitter.
    """
    out = np.empty((n, 2), dtype=np.complex128)
    for j in range(n):
        g = sample_rng(seed, tag * 1_000_003 + j)
        u = g.random(4)
        a0 = 2 * math.pi * (j + u[0]) / n
        a1 = 2 * math.pi * u[1]
        pattern = j % 3
        r0 = r if pattern in (0, 1) else r * math.sqrt(u[2])
        r1 = r if pattern in (0, 2) else r * math.sqrt(u[3])
        out[j, 0] = center[0] + r0 * complex(math.cos(a0), math.sin(a0))
        out[j, 1] = center[1] + r1 * complex(math.cos(a1), math.sin(a1))
    return out


def run_lsc_counterexample(
    consts: CounterexampleConstants,
    N_list: list[int],
    probe: ProbeSpec = ProbeSpec(),
    cfg: MembershipConfig = MembershipConfig(),
    c1: float | None = None,
) -> ExperimentReport:
    """Empirical radius of a member-free ball around (c0, c1) for each s^N.

    ``c1`` overrides the constant 1/4 - eps1 (used for the 1/4 + eps1 variant
    printed with the figures); the report records which one ran.
    """
    if not consts.check_9:
        raise ValueError("constants do not satisfy 3*sqrt(eps1) - eps1 + eps0 < 1/4")
    t0 = time.perf_counter()
    s = parse_template(LIMIT_TEMPLATE)
    c1_val = consts.c1 if c1 is None else c1
    center = ParameterPoint((consts.c0, c1_val), (2, 2), 2)
    radii = sorted(probe.radii)
    rep = ExperimentReport(
        "lsc",
        {
            "eps0": consts.eps0,
            "eps1": consts.eps1,
            "center": format_parameter(center),
            "c1_variant": "1/4-eps1" if c1 is None else "override",
            "N_list": list(N_list),
            "radii": radii,
            "samples_per_radius": probe.samples,
            "seed": probe.seed,
            "horizon": cfg.max_iterations,
            "critical_times": cfg.critical_times,
        },
    )
    member, witness = in_mandelbrot(center, s, cfg)
    rep.results["center_limit_member"] = member
    rep.check("center_in_limit_set", member, witness, None)

    spheres = [
        sphere_samples(center.constants, r, probe.samples, probe.seed, k)
        for k, r in enumerate(radii)
    ]
    per_n = []
    for N in N_list:
        sN = periodic_approximation(s, N)
        c_member, c_witness = in_mandelbrot(center, sN, cfg)
        eta = 0.0
        members_at = []
        for r, pts in zip(radii, spheres):
            steps, _ = kernels.membership_batch(pts, (2, 2), sN, cfg)
            n_mem = int((steps == 0).sum())
            members_at.append(n_mem)
            if n_mem or c_member:
                break
            eta = r
        per_n.append(
            {
                "N": N,
                "center_member": c_member,
                "center_witness": list(c_witness) if c_witness else None,
                "members_per_radius": members_at,
                "eta_emp": eta,
            }
        )
    rep.results["per_N"] = per_n
    etas = [row["eta_emp"] for row in per_n]
    rep.check("eta_positive", all(e > 0 for e in etas), etas, 0.0)
    if etas:
        rep.check("eta_not_vanishing", etas[-1] >= 0.5 * etas[0], [etas[0], etas[-1]], 0.5)
    rep.wall_time = time.perf_counter() - t0
    return rep


# -- boundedness -------------------------------------------------------------


def random_full_template(g: np.random.Generator, D: int, max_prefix: int = 8, max_period: int = 8) -> Template:
    while True:
        q = int(g.integers(0, max_prefix + 1))
        p = int(g.integers(1, max_period + 1))
        if q + p >= D:
            break
    syms = g.integers(0, D, q + p)
    slots = g.permutation(q + p)[:D]
    syms[slots] = np.arange(D)
    return Template(D, tuple(syms[:q]), tuple(syms[q:]))


def random_disc(g: np.random.Generator, radius: float, size: int | None = None):
    r = radius * np.sqrt(g.random(size))
    a = 2 * np.pi * g.random(size)
    return r * np.exp(1j * a)


def _is_member(p: ParameterPoint, t: Template, cfg: MembershipConfig) -> bool:
    steps, _ = kernels.membership_batch(np.array([p.constants]), p.degrees, t, cfg)
    return bool(steps[0] == 0)


def verify_boundedness(
    trials: int,
    D: int | tuple[int, ...],
    dmax: int,
    seed: int,
    cfg: MembershipConfig = MembershipConfig(),
    members: int = 100,
    probes_per_member: int = 8,
    max_attempts: int = 200_000,
) -> ExperimentReport:
    """Large constants must escape; points outside |z| = 2 must escape for members."""
    t0 = time.perf_counter()
    dims = (D,) if isinstance(D, int) else tuple(D)
    rep = ExperimentReport(
        "bounds",
        {"trials": trials, "D": list(dims), "dmax": dmax, "seed": seed,
         "members": members, "horizon": cfg.max_iterations},
    )
    failures = []
    for i in range(trials):
        g = sample_rng(seed, i)
        Di = dims[i % len(dims)]
        t = random_full_template(g, Di)
        consts = random_disc(g, 5.0, Di)
        big = int(g.integers(0, Di))
        consts[big] = g.uniform(2.05, 5.0) * np.exp(2j * np.pi * g.random())
        degs = tuple(int(x) for x in g.integers(2, dmax + 1, Di))
        p = ParameterPoint(tuple(consts), degs, dmax)
        if _is_member(p, t, cfg):
            failures.append({"template": format_template(t), "parameter": format_parameter(p)})
    rep.results["nonmember_failures"] = failures
    rep.check("large_constants_escape", not failures, len(failures), 0)

    found, attempts, probe_fail = 0, 0, []
    while found < members and attempts < max_attempts:
        g = sample_rng(seed ^ 0x5EED, attempts)
        attempts += 1
        Di = dims[attempts % len(dims)]
        t = random_full_template(g, Di)
        degs = tuple(int(x) for x in g.integers(2, dmax + 1, Di))
        p = ParameterPoint(tuple(random_disc(g, 2.0, Di)), degs, dmax)
        if not _is_member(p, t, cfg):
            continue
        found += 1
        for _ in range(probes_per_member):
            z = g.uniform(2.05, 3.0) * np.exp(2j * np.pi * g.random())
            for m in range(t.critical_span):
                v = classify_orbit(p, t, m, complex(z), cfg.max_iterations, cfg.overflow_guard)
                if v.bounded:
                    probe_fail.append({"parameter": format_parameter(p), "z": repr(complex(z)), "m": m})
    rep.results.update(members_found=found, attempts=attempts, probe_failures=probe_fail)
    rep.check("members_found", found >= members, found, members)
    rep.check("outer_points_escape", not probe_fail, len(probe_fail), 0)
    rep.wall_time = time.perf_counter() - t0
    return rep


# -- complete invariance -----------------------------------------------------


def invariance_violation(p: ParameterPoint, t: Template, z: complex, m: int, n: int, horizon: int) -> str | None:
    """Check the escape-step shift / reduced-horizon restatement for one sample."""
    lag = n - m
    v = classify_orbit(p, t, m, z, horizon)
    if v.escaped and v.escape_step <= lag:
        # Image already outside the escape radius; it must escape immediately.
        try:
            w = compose(p, t, m, n, z)
        except OverflowError:
            return None
        u = classify_orbit(p, t, n, w, 1)
        return None if u.escape_step == 1 else f"image of escaped point stayed bounded ({u})"
    w = compose(p, t, m, n, z)
    u = classify_orbit(p, t, n, w, horizon - lag)
    if v.escaped:
        expect = v.escape_step - lag
        return None if u.escape_step == expect else f"expected Escaped({expect}), got {u}"
    return None if u.bounded else f"expected Bounded({horizon - lag}), got {u}"


def verify_invariance(
    samples: int, p: ParameterPoint, t: Template, horizon: int, seed: int
) -> ExperimentReport:
    t0 = time.perf_counter()
    rep = ExperimentReport(
        "invariance",
        {"samples": samples, "parameter": format_parameter(p),
         "template": format_template(t), "horizon": horizon, "seed": seed},
    )
    R = escape_radius(p)
    top = max(1, horizon // 2)
    violations = []
    escaped = 0
    for i in range(samples):
        g = sample_rng(seed, i)
        z = complex(random_disc(g, R + 1.0))
        n = int(g.integers(1, top + 1))
        m = int(g.integers(0, n))
        v = classify_orbit(p, t, m, z, horizon)
        escaped += v.escaped
        msg = invariance_violation(p, t, z, m, n, horizon)
        if msg:
            violations.append({"z": repr(z), "m": m, "n": n, "detail": msg})
    rep.results = {"violations": violations, "escaped_samples": escaped,
                   "bounded_samples": samples - escaped}
    rep.check("no_violations", not violations, len(violations), 0)
    rep.wall_time = time.perf_counter() - t0
    return rep


def random_system(
    seed: int, index: int, max_D: int = 3, dmax: int = 4, member: bool = True
) -> tuple[ParameterPoint, Template]:
    """A random template and parameter in the closed polydisc of radius 2.

    With ``member`` set, draws are rejected until the parameter lies in the
    finite-horizon Mandelbrot set, so the filled Julia sets are nonempty.
    """
    cfg = MembershipConfig()
    for attempt in range(100_000):
        g = sample_rng(seed, index * 100_000 + attempt)
        D = 1 + index % max_D
        t = random_full_template(g, D)
        degs = tuple(int(x) for x in g.integers(2, dmax + 1, D))
        p = ParameterPoint(tuple(random_disc(g, 2.0, D)), degs, dmax)
        if not member or _is_member(p, t, cfg):
            return p, t
    raise RuntimeError("no member found")


def merge_reports(name: str, reports: list[ExperimentReport]) -> ExperimentReport:
    out = ExperimentReport(name, {"parts": [r.config for r in reports]})
    for k, r in enumerate(reports):
        out.results[f"part{k}"] = r.results
        for cname, c in r.checks.items():
            out.checks[f"part{k}_{cname}"] = c
        out.wall_time += r.wall_time
    return out

