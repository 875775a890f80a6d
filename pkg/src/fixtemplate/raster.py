"""Escape-time rasters of iterated filled Julia sets and Mandelbrot slices.

Cells hold 0 for Inside and the escape step otherwise. Work is split into
64x64 tiles; every tile is filled by exactly one worker and tiles never
overlap, so the output does not depend on the worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .dynamics import (
    DEFAULT_GUARD,
    MembershipConfig,
    ParameterPoint,
    escape_radius,
    format_parameter,
)
from .templates import Template, TemplateError, format_template

TILE = 64
WORKERS_ENV = "FIXTEMPLATE_WORKERS"


class WindowError(ValueError):
    pass


@dataclass(frozen=True)
class Window:
    re_min: float
    re_max: float
    im_min: float
    im_max: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise WindowError(f"degenerate window {self}")
        if self.width < 1 or self.height < 1:
            raise WindowError("window needs at least one pixel per axis")

    @property
    def pitch(self) -> tuple[float, float]:
        """Cell size along (re, im)."""
        return (
            (self.re_max - self.re_min) / self.width,
            (self.im_max - self.im_min) / self.height,
        )

    @property
    def diagonal(self) -> float:
        px, py = self.pitch
        return float(np.hypot(px, py))

    def centers(self) -> np.ndarray:
        """Complex pixel centers, shape (height, width), row 0 at the top."""
        i = np.arange(self.width)
        j = np.arange(self.height)
        re = self.re_min + (i + 0.5) * (self.re_max - self.re_min) / self.width
        im = self.im_max - (j + 0.5) * (self.im_max - self.im_min) / self.height
        return re[None, :] + 1j * im[:, None]

    def pixel_of(self, z: complex) -> tuple[int, int]:
        """(column, row) of the cell containing ``z``."""
        px, py = self.pitch
        i = int(np.floor((z.real - self.re_min) / px))
        j = int(np.floor((self.im_max - z.imag) / py))
        return min(max(i, 0), self.width - 1), min(max(j, 0), self.height - 1)

    def contains(self, z: complex) -> bool:
        return self.re_min <= z.real <= self.re_max and self.im_min <= z.imag <= self.im_max

    def scaled(self, factor: float) -> "Window":
        return Window(
            self.re_min,
            self.re_max,
            self.im_min,
            self.im_max,
            max(1, round(self.width * factor)),
            max(1, round(self.height * factor)),
        )

    def as_tuple(self) -> tuple:
        return (self.re_min, self.re_max, self.im_min, self.im_max, self.width, self.height)


@dataclass(eq=False)
class Raster:
    window: Window
    cells: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.cells = np.asarray(self.cells, dtype=np.int32)
        if self.cells.shape != (self.window.height, self.window.width):
            raise WindowError(
                f"cells shape {self.cells.shape} does not match window "
                f"{self.window.height}x{self.window.width}"
            )

    @property
    def inside(self) -> np.ndarray:
        return self.cells == 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, Raster):
            return NotImplemented
        return (
            self.window == other.window
            and np.array_equal(self.cells, other.cells)
            and self.meta == other.meta
        )


@dataclass(frozen=True)
class SliceSpec:
    base: ParameterPoint
    varying_coordinate: int
    window: Window

    def __post_init__(self):
        if not 0 <= self.varying_coordinate < self.base.D:
            raise WindowError(
                f"varying coordinate {self.varying_coordinate} outside 0..{self.base.D - 1}"
            )


def worker_count(workers: int | None = None) -> int:
    if workers is None:
        env = os.environ.get(WORKERS_ENV)
        workers = int(env) if env else (os.cpu_count() or 1)
    return max(1, workers)


def _tiles(height: int, width: int):
    for r0 in range(0, height, TILE):
        for c0 in range(0, width, TILE):
            yield slice(r0, min(r0 + TILE, height)), slice(c0, min(c0 + TILE, width))


def _fill(out: np.ndarray, fill_tile, workers: int | None) -> None:
    tiles = list(_tiles(*out.shape))
    n = worker_count(workers)
    if n == 1:
        for rs, cs in tiles:
            fill_tile(rs, cs)
        return
    with ThreadPoolExecutor(max_workers=n) as pool:
        for fut in [pool.submit(fill_tile, rs, cs) for rs, cs in tiles]:
            fut.result()


def raster_filled_julia(
    p: ParameterPoint,
    t: Template,
    m: int,
    w: Window,
    horizon: int = 400,
    guard: float = DEFAULT_GUARD,
    workers: int | None = None,
) -> Raster:
    if t.alphabet_size != p.D:
        raise TemplateError(f"template alphabet {t.alphabet_size} does not match D={p.D}")
    zs = w.centers()
    out = np.zeros((w.height, w.width), dtype=np.int32)
    consts = np.asarray(p.constants, dtype=np.complex128)
    degs = np.asarray(p.degrees, dtype=np.int64)
    prefix, period = kernels.template_arrays(t)
    R = escape_radius(p)

    def fill_tile(rs, cs):
        block = np.ascontiguousarray(zs[rs, cs]).reshape(-1)
        res = np.zeros(block.shape[0], dtype=np.int32)
        kernels.julia_block(block, consts, degs, prefix, period, m, horizon, R, guard, res)
        out[rs, cs] = res.reshape(zs[rs, cs].shape)

    _fill(out, fill_tile, workers)
    meta = {
        "mode": "julia",
        "template": format_template(t),
        "parameter": format_parameter(p),
        "time": m,
        "horizon": horizon,
        "guard": guard,
    }
    return Raster(w, out, meta)


def slice_parameters(spec: SliceSpec) -> np.ndarray:
    """Parameter rows (height*width x D) for every pixel of the slice."""
    zs = spec.window.centers().reshape(-1)
    params = np.empty((zs.shape[0], spec.base.D), dtype=np.complex128)
    params[:] = np.asarray(spec.base.constants, dtype=np.complex128)
    params[:, spec.varying_coordinate] = zs
    return params


def raster_mandelbrot_slice(
    spec: SliceSpec,
    t: Template,
    cfg: MembershipConfig = MembershipConfig(),
    workers: int | None = None,
) -> Raster:
    if t.alphabet_size != spec.base.D:
        raise TemplateError(
            f"template alphabet {t.alphabet_size} does not match D={spec.base.D}"
        )
    w = spec.window
    params = slice_parameters(spec).reshape(w.height, w.width, spec.base.D)
    out = np.zeros((w.height, w.width), dtype=np.int32)
    degs = np.asarray(spec.base.degrees, dtype=np.int64)
    prefix, period = kernels.template_arrays(t)
    ncrit = 1 if cfg.critical_times == "zero" else t.critical_span

    def fill_tile(rs, cs):
        block = np.ascontiguousarray(params[rs, cs]).reshape(-1, spec.base.D)
        steps = np.zeros(block.shape[0], dtype=np.int32)
        times = np.zeros(block.shape[0], dtype=np.int32)
        kernels.mandel_block(
            block, degs, prefix, period, ncrit, cfg.max_iterations,
            cfg.overflow_guard, steps, times,
        )
        out[rs, cs] = steps.reshape(params[rs, cs].shape[:2])

    _fill(out, fill_tile, workers)
    meta = {
        "mode": "mandel",
        "template": format_template(t),
        "parameter": format_parameter(spec.base),
        "vary": spec.varying_coordinate,
        "horizon": cfg.max_iterations,
        "critical_times": cfg.critical_times,
        "guard": cfg.overflow_guard,
    }
    return Raster(w, out, meta)


def boundary_of(r: Raster) -> Raster:
    """Inside cells with a non-Inside 4-neighbour; window edges count as outside."""
    inside = r.inside
    padded = np.pad(inside, 1, constant_values=False)
    interior = (
        padded[:-2, 1:-1] & padded[2:, 1:-1] & padded[1:-1, :-2] & padded[1:-1, 2:]
    )
    edge = inside & ~interior
    cells = np.where(edge, 0, 1).astype(np.int32)
    return Raster(r.window, cells, {**r.meta, "derived": "boundary"})
