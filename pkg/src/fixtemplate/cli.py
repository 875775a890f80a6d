"""Command-line entry point: ``fixtemplate <subcommand> [options]``.

Exit status is 0 when the run succeeds and every recorded check passes, 1 when
a check fails, 2 on a configuration error. Each run writes its resolved
configuration (``config.txt``, replayable with ``--config``) and a
``manifest.json`` of output hashes under ``--out``. Wall times and the worker
count go to ``timings.json``, which the manifest leaves out so that outputs
are comparable across machines and worker counts.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import re
import sys
from pathlib import Path

from . import pnm
from .dynamics import (
    MembershipConfig,
    ParameterError,
    ParameterPoint,
    format_parameter,
    in_mandelbrot,
    parse_number,
    parse_parameter,
)
from .experiments import (
    ExperimentReport,
    ProbeSpec,
    counterexample_constants,
    merge_reports,
    random_system,
    run_lsc_counterexample,
    run_usc_experiment,
    usc_slices,
    verify_boundedness,
    verify_invariance,
)
from .metrics import CSV_HEADER, DistanceReport, distance_report, point_to_set_distance, quantization_bound
from .raster import (
    WORKERS_ENV,
    Raster,
    SliceSpec,
    Window,
    WindowError,
    raster_filled_julia,
    raster_mandelbrot_slice,
    worker_count,
)
from .templates import TemplateError, format_template, parse_template, periodic_approximation

log = logging.getLogger("fixtemplate")

EPS = "1/256"
FIGURE_C0 = "1/2-1/256"
C1_MINUS = "1/4-1/256"
C1_PLUS = "1/4+1/256"


class ConfigError(ValueError):
    def __init__(self, message: str, where: str = ""):
        super().__init__(message)
        self.where = where


# -- literal converters (each raises with a column when it can) ---------------


def _window(text: str, res: tuple[int, int]) -> Window:
    parts = text.split(",")
    if len(parts) != 4:
        raise ParameterError("window needs re_min,re_max,im_min,im_max", column=1)
    vals, col = [], 0
    for part in parts:
        vals.append(parse_number(part, col))
        col += len(part) + 1
    return Window(*vals, *res)


def _res(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    try:
        nums = [int(x) for x in parts]
    except ValueError:
        raise ParameterError(f"resolution {text!r} is not WxH or N", column=1) from None
    if len(nums) == 1:
        nums *= 2
    if len(nums) != 2 or min(nums) < 1:
        raise ParameterError(f"bad resolution {text!r}", column=1)
    return nums[0], nums[1]


def _int_list(text: str) -> list[int]:
    out, col = [], 1
    for part in text.split(","):
        try:
            out.append(int(part))
        except ValueError:
            raise ParameterError(f"{part!r} is not an integer", column=col) from None
        col += len(part) + 1
    return out


def _num_list(text: str) -> list[float]:
    out, col = [], 0
    for part in text.split(","):
        out.append(parse_number(part, col))
        col += len(part) + 1
    return out


def _choice(*allowed):
    def convert(text: str) -> str:
        if text not in allowed:
            raise ParameterError(f"{text!r} not one of {', '.join(allowed)}", column=1)
        return text

    return convert


def _slices(text: str, base: ParameterPoint, res: tuple[int, int]) -> list[SliceSpec]:
    out = []
    for chunk in text.split(";"):
        vary, _, win = chunk.partition(":")
        out.append(SliceSpec(base, int(vary), _window(win, res)))
    return out


# -- argument handling ---------------------------------------------------------

COMMON = {"out", "workers", "config", "verbose"}


def _add(sub, name, default=None, help=None, **kw):
    sub.add_argument("--" + name.replace("_", "-"), dest=name, default=default, help=help, **kw)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fixtemplate", description=__doc__.splitlines()[0])
    subs = ap.add_subparsers(dest="command", required=True)

    def sub(name, help):
        sp = subs.add_parser(name, help=help)
        _add(sp, "out", "out", "output directory")
        _add(sp, "workers", None, f"worker threads (default ${WORKERS_ENV} or CPU count)")
        _add(sp, "config", None, "key = value file mirroring the flags")
        sp.add_argument("-v", "--verbose", action="store_true")
        return sp

    sp = sub("julia", "raster an iterated filled Julia set")
    _add(sp, "template", "D=1:|0")
    _add(sp, "param", "c=(0,0) d=(2)")
    _add(sp, "time", "0")
    _add(sp, "window", "-2,2,-2,2")
    _add(sp, "res", "400x400")
    _add(sp, "horizon", "400")

    sp = sub("mandel", "raster a one-coordinate slice of a fixed-template Mandelbrot set")
    _add(sp, "template", "D=2:0|1")
    _add(sp, "base", f"c=({FIGURE_C0},0;{C1_MINUS},0) d=(2;2)")
    _add(sp, "vary", "0")
    _add(sp, "window", "-1.25,1.25,-1.25,1.25")
    _add(sp, "res", "400x400")
    _add(sp, "horizon", "400")
    _add(sp, "critical_times", "all", choices=["all", "zero"])

    sp = sub("distance", "directed and Hausdorff distances between two PBM/PGM rasters")
    sp.add_argument("a")
    sp.add_argument("b")
    _add(sp, "window", None, "override the window stored in the files")
    _add(sp, "labels", None, "labelA,labelB (default: file names)")

    sp = sub("usc", "upper-semicontinuity trend for periodic approximations")
    _add(sp, "template", "D=2:0|1")
    _add(sp, "base", f"c=({FIGURE_C0},0;{C1_MINUS},0) d=(2;2)")
    _add(sp, "slices", "0:-1.25,1.25,-1.25,1.25", "VARY:WINDOW[;VARY:WINDOW...]")
    _add(sp, "res", "300x300")
    _add(sp, "n_list", "10,20,50,100,200")
    _add(sp, "horizon", "400")
    _add(sp, "critical_times", "all", choices=["all", "zero"])

    sp = sub("lsc", "member-free ball around the counterexample parameter")
    _add(sp, "eps0", EPS)
    _add(sp, "eps1", EPS)
    _add(sp, "c1", None, "override c1 (e.g. 1/4+1/256)")
    _add(sp, "n_list", "20,50,100,200")
    _add(sp, "radii", "0.002,0.005,0.01,0.02")
    _add(sp, "samples", "256")
    _add(sp, "seed", "0")
    _add(sp, "horizon", "400")
    _add(sp, "critical_times", "all", choices=["all", "zero"])

    sp = sub("bounds", "large parameters escape; points beyond |z|=2 escape")
    _add(sp, "trials", "1000")
    _add(sp, "dims", "1,2,3")
    _add(sp, "dmax", "4")
    _add(sp, "members", "100")
    _add(sp, "seed", "0")
    _add(sp, "horizon", "400")

    sp = sub("invariance", "randomized complete-invariance check")
    _add(sp, "samples", "10000")
    _add(sp, "systems", "5")
    _add(sp, "horizon", "200")
    _add(sp, "seed", "42")

    for name in ("figure1", "figure2"):
        sp = sub(name, f"preset reproducing {name} (1200x1200 at scale 1)")
        _add(sp, "scale", "1")
        _add(sp, "horizon", "400")
        _add(sp, "critical_times", "all", choices=["all", "zero"])
        _add(sp, "c1_variant", "minus", choices=["minus", "plus", "both"])
    return ap


def _subparser(ap: argparse.ArgumentParser, command: str) -> argparse.ArgumentParser:
    for action in ap._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise KeyError(command)


def load_config_file(path: str, sp: argparse.ArgumentParser) -> dict[str, tuple[str, str]]:
    """``key = value`` lines -> {dest: (value, origin)}; unknown keys are errors."""
    known = {a.dest for a in sp._actions if a.option_strings} - COMMON
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(str(exc), path) from None
    for lineno, line in enumerate(lines, 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, eq, value = line.partition("=")
        if not eq:
            raise ConfigError("expected 'key = value'", f"{path}:{lineno}:1")
        dest = key.strip().replace("-", "_")
        if dest not in known:
            col = len(key) - len(key.lstrip()) + 1
            raise ConfigError(f"unknown key {key.strip()!r}", f"{path}:{lineno}:{col}")
        out[dest] = (value.strip(), f"{path}:{lineno}:{len(key) + 2 + len(value) - len(value.lstrip())}")
    return out


class Resolver:
    """Converts string options, tagging errors with where the value came from."""

    def __init__(self, args, origins):
        self.args = args
        self.origins = origins
        self.resolved: dict[str, str] = {}

    def get(self, name, convert=str, canonical=None):
        raw = getattr(self.args, name)
        if raw is None:
            return None
        try:
            val = convert(raw)
        except (TemplateError, ParameterError) as exc:
            where = self.origins.get(name, "--" + name.replace("_", "-"))
            col = getattr(exc, "column", None)
            if col and where.startswith("--"):
                where = f"{where}:{col}"
            elif col:
                file, line, start = where.rsplit(":", 2)
                where = f"{file}:{line}:{int(start) + col - 1}"
            raise ConfigError(str(exc), where) from None
        except (ValueError, WindowError) as exc:
            raise ConfigError(str(exc), self.origins.get(name, "--" + name.replace("_", "-"))) from None
        self.resolved[name] = canonical(val) if canonical else str(raw)
        return val


# -- output helpers ------------------------------------------------------------


class Output:
    def __init__(self, root: str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.files: list[str] = []

    def write(self, name: str, data: bytes) -> None:
        (self.root / name).write_bytes(data)
        self.files.append(name)

    def text(self, name: str, text: str) -> None:
        self.write(name, text.encode())

    def json(self, name: str, obj) -> None:
        self.text(name, json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")

    def raster(self, stem: str, r: Raster, pgm: bool = True) -> None:
        self.write(stem + ".pbm", pnm.pbm_bytes(r))
        if pgm:
            self.write(stem + ".pgm", pnm.pgm_bytes(r))

    def image(self, stem: str, rgb) -> None:
        self.write(stem + ".ppm", pnm.ppm_bytes(rgb))
        pnm.write_png(self.root / (stem + ".png"), rgb)
        self.files.append(stem + ".png")

    def finish(self, command: str, resolved: dict, timings: dict, note: str = "") -> None:
        lines = [f"# fixtemplate {command}{note}"]
        lines += [f"{k} = {v}" for k, v in sorted(resolved.items())]
        self.text("config.txt", "\n".join(lines) + "\n")
        manifest = {
            "command": command,
            "files": [
                {"name": n, "sha256": hashlib.sha256((self.root / n).read_bytes()).hexdigest()}
                for n in sorted(set(self.files))
            ],
        }
        (self.root / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
        (self.root / "timings.json").write_text(json.dumps(timings, indent=2) + "\n")


def _json_default(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if hasattr(obj, "item"):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj)}")


def _cfg(res: Resolver) -> MembershipConfig:
    ct = res.get("critical_times", _choice("all", "zero")) if hasattr(res.args, "critical_times") else "all"
    return MembershipConfig(max_iterations=res.get("horizon", int), critical_times=ct)


def _report_csv(rows: list[DistanceReport]) -> str:
    return "\n".join([CSV_HEADER] + [r.csv_row() for r in rows]) + "\n"


# -- subcommands -----------------------------------------------------------------


def cmd_julia(res: Resolver, out: Output, workers):
    t = res.get("template", parse_template, format_template)
    p = res.get("param", parse_parameter, format_parameter)
    size = res.get("res", _res, lambda v: f"{v[0]}x{v[1]}")
    w = res.get("window", lambda s: _window(s, size))
    r = raster_filled_julia(p, t, res.get("time", int), w, res.get("horizon", int), workers=workers)
    out.raster("julia", r)
    out.image("julia", pnm.render_overlay([(r, pnm.BLACK)]))
    return [], {}


def cmd_mandel(res: Resolver, out: Output, workers):
    t = res.get("template", parse_template, format_template)
    base = res.get("base", parse_parameter, format_parameter)
    size = res.get("res", _res, lambda v: f"{v[0]}x{v[1]}")
    w = res.get("window", lambda s: _window(s, size))
    vary = res.get("vary", int)
    try:
        spec = SliceSpec(base, vary, w)
    except WindowError as exc:
        raise ConfigError(str(exc), "--vary") from None
    r = raster_mandelbrot_slice(spec, t, _cfg(res), workers)
    out.raster("mandel", r)
    out.image("mandel", pnm.render_overlay([(r, pnm.GREEN)]))
    return [], {}


def cmd_distance(res: Resolver, out: Output, workers):
    a_path, b_path = res.args.a, res.args.b
    win = None
    if res.args.window:
        try:
            size = _pnm_size(a_path)
        except (OSError, pnm.PNMError) as exc:
            raise ConfigError(str(exc), a_path) from None
        win = res.get("window", lambda s: _window(s, size))
    try:
        a = pnm.read_raster(a_path, win)
        b = pnm.read_raster(b_path, win)
    except (OSError, pnm.PNMError, WindowError) as exc:
        raise ConfigError(str(exc), "distance inputs") from None
    labels = (res.get("labels") or f"{Path(a_path).stem},{Path(b_path).stem}").split(",")
    try:
        row = distance_report(a, b, labels[0], labels[-1])
    except WindowError as exc:
        raise ConfigError(str(exc), "distance inputs") from None
    text = _report_csv([row])
    sys.stdout.write(text)
    out.text("distance.csv", text)
    return [], {}


def _pnm_size(path) -> tuple[int, int]:
    data = Path(path).read_bytes()
    _, fields, _, _ = pnm._header(data, 2)
    return fields[0], fields[1]


def cmd_usc(res: Resolver, out: Output, workers):
    t = res.get("template", parse_template, format_template)
    base = res.get("base", parse_parameter, format_parameter)
    size = res.get("res", _res, lambda v: f"{v[0]}x{v[1]}")
    slices = res.get("slices", lambda s: _slices(s, base, size))
    n_list = res.get("n_list", _int_list)
    rasters = {}
    rep = run_usc_experiment(t, base, slices, n_list, _cfg(res), workers, keep=rasters)
    rows = []
    for (idx, N), r in sorted(rasters.items(), key=lambda kv: (kv[0][0], kv[0][1] or 0)):
        out.raster(f"usc_slice{idx}_{'limit' if N is None else f'N{N}'}", r, pgm=False)
        if N is not None:
            rows.append(distance_report(r, rasters[(idx, None)], f"slice{idx}_N{N}", f"slice{idx}_limit"))
    out.text("distances.csv", _report_csv(rows))
    return [rep], {}


def cmd_lsc(res: Resolver, out: Output, workers):
    eps0 = res.get("eps0", parse_number, repr)
    eps1 = res.get("eps1", parse_number, repr)
    try:
        consts = counterexample_constants(eps0, eps1)
    except ValueError as exc:
        raise ConfigError(str(exc), "--eps0/--eps1") from None
    if not consts.check_9:
        raise ConfigError("eps0, eps1 violate 3*sqrt(eps1) - eps1 + eps0 < 1/4", "--eps0/--eps1")
    probe = ProbeSpec(
        tuple(res.get("radii", _num_list, lambda v: ",".join(map(repr, v)))),
        res.get("samples", int),
        res.get("seed", int),
    )
    c1 = res.get("c1", parse_number, repr)
    rep = run_lsc_counterexample(consts, res.get("n_list", _int_list), probe, _cfg(res), c1=c1)
    rep.results["constants"] = _constants_dict(consts)
    return [rep], {}


def _constants_dict(k) -> dict:
    return {f: getattr(k, f) for f in k.__dataclass_fields__}


def cmd_bounds(res: Resolver, out: Output, workers):
    rep = verify_boundedness(
        res.get("trials", int),
        tuple(res.get("dims", _int_list)),
        res.get("dmax", int),
        res.get("seed", int),
        _cfg(res),
        members=res.get("members", int),
    )
    return [rep], {}


def cmd_invariance(res: Resolver, out: Output, workers):
    samples = res.get("samples", int)
    systems = res.get("systems", int)
    horizon = res.get("horizon", int)
    seed = res.get("seed", int)
    per = [samples // systems + (k < samples % systems) for k in range(systems)]
    parts = [
        verify_invariance(n, *random_system(seed, k), horizon, seed + k)
        for k, n in enumerate(per)
    ]
    return [merge_reports("invariance", parts)], {}


def _figure_bases(res: Resolver) -> list[tuple[str, ParameterPoint]]:
    variant = res.get("c1_variant", _choice("minus", "plus", "both"))
    c0 = parse_number(FIGURE_C0)
    out = []
    if variant in ("minus", "both"):
        out.append(("minus", ParameterPoint((c0, parse_number(C1_MINUS)), (2, 2), 2)))
    if variant in ("plus", "both"):
        out.append(("plus", ParameterPoint((c0, parse_number(C1_PLUS)), (2, 2), 2)))
    return out


def _layers(rasters, idx, n_list):
    colors = {None: pnm.GREEN, n_list[0]: pnm.LIGHT_BLUE, n_list[-1]: pnm.DARK_BROWN}
    return [(rasters[(idx, N)], colors[N]) for N in (None, *n_list)]


def cmd_figure1(res: Resolver, out: Output, workers):
    scale = res.get("scale", parse_number, repr)
    cfg = _cfg(res)
    s = parse_template("D=2:0|1")
    n_list = [20, 200]
    reports, rows = [], []
    for name, base in _figure_bases(res):
        rasters = {}
        rep = run_usc_experiment(s, base, usc_slices(base, scale), n_list, cfg, workers, keep=rasters)
        rep.experiment = f"figure1_{name}"
        reports.append(rep)
        for idx, coord in enumerate(("c0", "c1")):
            stem = f"figure1_{name}_{coord}"
            for N in (None, *n_list):
                out.raster(f"{stem}_{'limit' if N is None else f'N{N}'}", rasters[(idx, N)], pgm=False)
                if N is not None:
                    rows.append(distance_report(rasters[(idx, N)], rasters[(idx, None)],
                                                f"{stem}_N{N}", f"{stem}_limit"))
            out.image(stem, pnm.render_overlay(_layers(rasters, idx, n_list)))
    out.text("distances.csv", _report_csv(rows))
    return reports, {}


def cmd_figure2(res: Resolver, out: Output, workers):
    scale = res.get("scale", parse_number, repr)
    cfg = _cfg(res)
    s = parse_template("D=2:0|1")
    n_list = [20, 200]
    n = max(1, round(1200 * scale))
    reports, rows = [], []
    for name, base in _figure_bases(res):
        c0, c1 = base.constants
        panels = [
            SliceSpec(base, 0, Window(c0.real - 0.25, c0.real + 0.25, -0.25, 0.25, n, n)),
            SliceSpec(base, 1, Window(c1.real - 0.05, c1.real + 0.05, -0.05, 0.05, n, n)),
        ]
        rep = ExperimentReport(
            f"figure2_{name}",
            {"base": format_parameter(base), "scale": scale, "N_list": n_list,
             "horizon": cfg.max_iterations, "critical_times": cfg.critical_times,
             "windows": [list(p.window.as_tuple()) for p in panels]},
        )
        member, witness = in_mandelbrot(base, s, cfg)
        rep.results["center_limit_member"] = member
        rep.check("center_in_limit_set", member, witness)
        for idx, (coord, spec) in enumerate(zip(("c0", "c1"), panels)):
            stem = f"figure2_{name}_{coord}"
            center = base.constants[idx]
            rasters = {(idx, None): raster_mandelbrot_slice(spec, s, cfg, workers)}
            for N in n_list:
                rasters[(idx, N)] = raster_mandelbrot_slice(spec, periodic_approximation(s, N), cfg, workers)
            panel = []
            for N in (None, *n_list):
                r = rasters[(idx, N)]
                out.raster(f"{stem}_{'limit' if N is None else f'N{N}'}", r, pgm=False)
                if N is not None:
                    dr = distance_report(rasters[(idx, None)], r, f"{stem}_limit", f"{stem}_N{N}")
                    rows.append(dr)
                    gap = point_to_set_distance(center, r)
                    panel.append({"N": N, "d_limit_approx": dr.d_ab, "d_H": dr.d_h,
                                  "center_to_approx": gap,
                                  "quantization_bound": quantization_bound(spec.window)})
                    rep.check(f"{coord}_N{N}_center_gap", gap > 0, gap, 0.0)
            rep.results[coord] = panel
            img = pnm.render_overlay(_layers(rasters, idx, n_list))
            pnm.draw_cross(img, spec.window, center)
            out.image(stem, img)
        reports.append(rep)
    out.text("distances.csv", _report_csv(rows))
    return reports, {}


COMMANDS = {
    "julia": cmd_julia,
    "mandel": cmd_mandel,
    "distance": cmd_distance,
    "usc": cmd_usc,
    "lsc": cmd_lsc,
    "bounds": cmd_bounds,
    "invariance": cmd_invariance,
    "figure1": cmd_figure1,
    "figure2": cmd_figure2,
}


def _join_negative_values(argv: list[str]) -> list[str]:
    """Turn ``--window -1,1,...`` into ``--window=-1,1,...`` for argparse."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else ""
        if tok.startswith("--") and "=" not in tok and re.match(r"^-[\d.]", nxt):
            out.append(f"{tok}={nxt}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv: list[str] | None = None) -> int:
    argv = _join_negative_values(list(sys.argv[1:] if argv is None else argv))
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        origins = {}
        if args.config:
            sp = _subparser(ap, args.command)
            given = {tok.split("=", 1)[0] for tok in argv if tok.startswith("-")}
            explicit = {a.dest for a in sp._actions if given & set(a.option_strings)}
            for dest, (value, where) in load_config_file(args.config, sp).items():
                if dest not in explicit:
                    setattr(args, dest, value)
                    origins[dest] = where
        res = Resolver(args, origins)
        workers = res.get("workers", int)
        res.resolved.pop("workers", None)
        workers = worker_count(workers)
        out = Output(args.out)
        reports, _ = COMMANDS[args.command](res, out, workers)
    except ConfigError as exc:
        where = f"{exc.where}: " if exc.where else ""
        print(f"fixtemplate: error: {where}{exc}", file=sys.stderr)
        return 2
    timings = {"workers": workers}
    for rep in reports:
        out.json(f"report_{rep.experiment}.json", rep.to_dict())
        timings[rep.experiment] = rep.wall_time
        for cname, c in rep.checks.items():
            status = "PASS" if c["passed"] else "FAIL"
            print(f"{status} {rep.experiment}.{cname}: value={c['value']} tolerance={c['tolerance']}")
    note = f" {args.a} {args.b}" if args.command == "distance" else ""
    out.finish(args.command, res.resolved, timings, note)
    return 0 if all(r.passed for r in reports) else 1


if __name__ == "__main__":
    sys.exit(main())
