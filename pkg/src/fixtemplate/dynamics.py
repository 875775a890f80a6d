"""Template iteration of unicritical maps z**d + c.

The functions here are the scalar reference path. Bulk evaluation for rasters
and sampling experiments goes through :mod:`fixtemplate.kernels`, which runs the
same arithmetic in compiled form.
"""

from __future__ import annotations

import cmath
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

from .templates import Template, TemplateError, symbol_at

DEFAULT_MAX_ITERATIONS = 400
DEFAULT_GUARD = 1e150


class ParameterError(ValueError):
    def __init__(self, message: str, column: int | None = None):
        super().__init__(message)
        self.column = column


@dataclass(frozen=True)
class ParameterPoint:
    constants: tuple[complex, ...]
    degrees: tuple[int, ...]
    d_max: int = 0

    def __post_init__(self):
        object.__setattr__(self, "constants", tuple(complex(c) for c in self.constants))
        object.__setattr__(self, "degrees", tuple(int(d) for d in self.degrees))
        if not self.constants or len(self.constants) != len(self.degrees):
            raise ParameterError(
                f"need equal, nonzero numbers of constants and degrees "
                f"(got {len(self.constants)} and {len(self.degrees)})"
            )
        if self.d_max == 0:
            object.__setattr__(self, "d_max", max(max(self.degrees), 2))
        if self.d_max < 2:
            raise ParameterError(f"degree bound must be >= 2, got {self.d_max}")
        for d in self.degrees:
            if not 2 <= d <= self.d_max:
                raise ParameterError(f"degree {d} outside 2..{self.d_max}")

    @property
    def D(self) -> int:
        return len(self.constants)

    def with_constant(self, index: int, value: complex) -> "ParameterPoint":
        consts = list(self.constants)
        consts[index] = value
        return ParameterPoint(tuple(consts), self.degrees, self.d_max)

    def __str__(self) -> str:
        return format_parameter(self)


@dataclass(frozen=True)
class OrbitVerdict:
    """Escaped at ``escape_step`` (1-based), or bounded for ``horizon`` steps."""

    escape_step: int | None
    horizon: int
    final_modulus: float

    @property
    def escaped(self) -> bool:
        return self.escape_step is not None

    @property
    def bounded(self) -> bool:
        return self.escape_step is None


@dataclass(frozen=True)
class MembershipConfig:
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    critical_times: Literal["all", "zero"] = "all"
    overflow_guard: float = DEFAULT_GUARD

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ParameterError("max_iterations must be >= 1")
        if self.critical_times not in ("all", "zero"):
            raise ParameterError(f"unknown critical_times mode {self.critical_times!r}")
        if not self.overflow_guard > 0:
            raise ParameterError("overflow_guard must be positive")


def ipow(z: complex, d: int) -> complex:
    """z**d by repeated squaring (no multiplication by the unit)."""
    result = None
    base = z
    while d:
        if d & 1:
            result = base if result is None else result * base
        d >>= 1
        if d:
            base = base * base
    return result


def step(z: complex, c: complex, d: int) -> complex:
    return ipow(z, d) + c


def escape_radius(p: ParameterPoint) -> float:
    return max(2.0, *(abs(c) for c in p.constants))


def _check_alphabet(p: ParameterPoint, t: Template) -> None:
    if t.alphabet_size != p.D:
        raise TemplateError(
            f"template alphabet {t.alphabet_size} does not match D={p.D}"
        )


def compose(p: ParameterPoint, t: Template, m: int, n: int, z: complex) -> complex:
    """Apply the maps selected by ``s_{m+1} .. s_n`` to ``z`` in order."""
    _check_alphabet(p, t)
    if not 0 <= m < n:
        raise ValueError(f"need 0 <= m < n, got m={m}, n={n}")
    for k in range(m + 1, n + 1):
        i = symbol_at(t, k)
        z = step(z, p.constants[i], p.degrees[i])
        if not cmath.isfinite(z):
            raise OverflowError(f"composition overflowed at step {k}")
    return z


def classify_orbit(
    p: ParameterPoint,
    t: Template,
    m: int,
    z0: complex,
    horizon: int,
    guard: float = DEFAULT_GUARD,
) -> OrbitVerdict:
    _check_alphabet(p, t)
    R = escape_radius(p)
    z = complex(z0)
    for k in range(1, horizon + 1):
        i = symbol_at(t, m + k)
        z = step(z, p.constants[i], p.degrees[i])
        r = abs(z)
        if r > R or not r <= guard:
            return OrbitVerdict(k, horizon, r)
    return OrbitVerdict(None, horizon, abs(z))


def critical_times(t: Template, cfg: MembershipConfig) -> range:
    return range(1) if cfg.critical_times == "zero" else range(t.critical_span)


def in_mandelbrot(
    p: ParameterPoint, t: Template, cfg: MembershipConfig = MembershipConfig()
) -> tuple[bool, tuple[int, int] | None]:
    """Finite-horizon membership; the witness is (critical time, escape step)."""
    _check_alphabet(p, t)
    for m in critical_times(t, cfg):
        v = classify_orbit(p, t, m, 0j, cfg.max_iterations, cfg.overflow_guard)
        if v.escaped:
            return False, (m, v.escape_step)
    return True, None


# -- literals ---------------------------------------------------------------

_TERM = re.compile(r"\s*([+-]?)\s*(\d+(?:\.\d*)?|\.\d+)(?:[eE]([+-]?\d+))?(?:\s*/\s*(\d+))?")


def parse_number(text: str, offset: int = 0) -> float:
    """Exact sum of decimal/rational terms, e.g. ``1/2-1/256``, rounded once."""
    pos = 0
    total = Fraction(0)
    src = text.strip()
    lead = len(text) - len(text.lstrip())
    if not src:
        raise ParameterError("empty number", column=offset + 1)
    while pos < len(src):
        m = _TERM.match(src, pos)
        if m is None or m.end() == pos or (pos > 0 and not m.group(1)):
            raise ParameterError(
                f"cannot parse number {src!r}", column=offset + lead + pos + 1
            )
        val = Fraction(m.group(2))
        if m.group(3):
            val *= Fraction(10) ** int(m.group(3))
        if m.group(4):
            den = int(m.group(4))
            if den == 0:
                raise ParameterError("division by zero", column=offset + lead + pos + 1)
            val /= den
        total += -val if m.group(1) == "-" else val
        pos = m.end()
    return float(total)


_FIELD = re.compile(r"(\w+)\s*=\s*(\([^)]*\)|\S+)")


def parse_parameter(text: str) -> ParameterPoint:
    """Parse ``c=(re,im;re,im) d=(2;2) dmax=2``.

    A single constant entry is broadcast to every coordinate when ``d`` has
    more entries; a constant entry without ``,im`` is real.
    """
    fields: dict[str, tuple[str, int]] = {}
    pos = 0
    for m in _FIELD.finditer(text):
        gap = text[pos : m.start()]
        if gap.strip():
            raise ParameterError(
                f"unexpected text {gap.strip()!r}", column=pos + len(gap) - len(gap.lstrip()) + 1
            )
        key = m.group(1)
        if key not in ("c", "d", "dmax"):
            raise ParameterError(f"unknown parameter field {key!r}", column=m.start() + 1)
        if key in fields:
            raise ParameterError(f"duplicate field {key!r}", column=m.start() + 1)
        fields[key] = (m.group(2), m.start(2))
        pos = m.end()
    if text[pos:].strip():
        raise ParameterError(f"unexpected text {text[pos:].strip()!r}", column=pos + 1)
    if "c" not in fields:
        raise ParameterError("missing c=(...)", column=1)

    def entries(key):
        body, col = fields[key]
        if not (body.startswith("(") and body.endswith(")")):
            raise ParameterError(f"{key} must be parenthesized", column=col + 1)
        out, start = [], col + 1
        for chunk in body[1:-1].split(";"):
            out.append((chunk, start))
            start += len(chunk) + 1
        return out

    consts = []
    for chunk, col in entries("c"):
        parts = chunk.split(",")
        if len(parts) > 2:
            raise ParameterError(f"complex entry {chunk!r} has too many parts", column=col + 1)
        re_part = parse_number(parts[0], col)
        im_part = parse_number(parts[1], col + len(parts[0]) + 1) if len(parts) == 2 else 0.0
        consts.append(complex(re_part, im_part))
    if "d" in fields:
        degrees = []
        for chunk, col in entries("d"):
            try:
                degrees.append(int(chunk.strip()))
            except ValueError:
                raise ParameterError(f"degree {chunk!r} is not an integer", column=col + 1) from None
    else:
        degrees = [2] * len(consts)
    if len(consts) == 1 and len(degrees) > 1:
        consts = consts * len(degrees)
    dmax = 0
    if "dmax" in fields:
        body, col = fields["dmax"]
        try:
            dmax = int(body)
        except ValueError:
            raise ParameterError(f"dmax {body!r} is not an integer", column=col + 1) from None
    try:
        return ParameterPoint(tuple(consts), tuple(degrees), dmax)
    except ParameterError as exc:
        exc.column = exc.column or 1
        raise


def format_parameter(p: ParameterPoint) -> str:
    c = ";".join(f"{z.real!r},{z.imag!r}" for z in p.constants)
    d = ";".join(str(x) for x in p.degrees)
    return f"c=({c}) d=({d}) dmax={p.d_max}"


def product_distance(p: ParameterPoint, q: ParameterPoint) -> float:
    """Max-metric over constants and degrees."""
    if p.D != q.D:
        raise ParameterError("dimension mismatch")
    return max(
        max(abs(a - b), abs(x - y))
        for a, b, x, y in zip(p.constants, q.constants, p.degrees, q.degrees)
    )

