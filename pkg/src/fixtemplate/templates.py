"""Eventually periodic template sequences over the alphabet {0..D-1}.

A template is stored as a finite prefix followed by a repeating period and is
indexed from 1, so ``symbol_at(t, 1)`` is the first polynomial applied.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

DEFAULT_HORIZON = 64
_DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"


class TemplateError(ValueError):
    """Malformed template or incompatible template arguments."""

    def __init__(self, message: str, column: int | None = None):
        super().__init__(message)
        self.column = column


@dataclass(frozen=True)
class Template:
    alphabet_size: int
    prefix: tuple[int, ...]
    period: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(int(x) for x in self.prefix))
        object.__setattr__(self, "period", tuple(int(x) for x in self.period))
        if self.alphabet_size < 1:
            raise TemplateError(f"alphabet size must be >= 1, got {self.alphabet_size}")
        if not self.period:
            raise TemplateError("period must be nonempty")
        for sym in self.prefix + self.period:
            if not 0 <= sym < self.alphabet_size:
                raise TemplateError(
                    f"symbol {sym} outside alphabet 0..{self.alphabet_size - 1}"
                )

    @property
    def critical_span(self) -> int:
        """Number of distinct shifted systems, ``len(prefix) + len(period)``."""
        return len(self.prefix) + len(self.period)

    def symbols(self, n: int, start: int = 1) -> list[int]:
        """Symbols ``s_start .. s_{start+n-1}``."""
        return [symbol_at(self, k) for k in range(start, start + n)]

    def __str__(self) -> str:
        return format_template(self)


def symbol_at(t: Template, m: int) -> int:
    if m < 1:
        raise TemplateError(f"templates are indexed from 1, got m={m}")
    q = len(t.prefix)
    if m <= q:
        return t.prefix[m - 1]
    return t.period[(m - q - 1) % len(t.period)]


def shift(t: Template, m: int) -> Template:
    """Drop the first ``m`` symbols, keeping the representation normalized."""
    if m < 0:
        raise TemplateError(f"shift amount must be >= 0, got {m}")
    q = len(t.prefix)
    if m <= q:
        return Template(t.alphabet_size, t.prefix[m:], t.period)
    r = (m - q) % len(t.period)
    return Template(t.alphabet_size, (), t.period[r:] + t.period[:r])


def is_full(t: Template) -> bool:
    return set(t.prefix) | set(t.period) == set(range(t.alphabet_size))


def agreement_bound(s: Template, t: Template) -> int:
    """Index K such that agreement on 1..K decides pointwise equality."""
    return max(len(s.prefix), len(t.prefix)) + len(s.period) * len(t.period)


def pointwise_equal(s: Template, t: Template) -> bool:
    if s.alphabet_size != t.alphabet_size:
        return False
    return all(
        symbol_at(s, k) == symbol_at(t, k) for k in range(1, agreement_bound(s, t) + 1)
    )


def _agree_beyond(s: Template, t: Template, horizon: int) -> bool:
    # Both tails are periodic after max prefix length, with common period lcm(p, p').
    start = max(horizon, len(s.prefix), len(t.prefix))
    stop = start + math.lcm(len(s.period), len(t.period))
    return all(symbol_at(s, k) == symbol_at(t, k) for k in range(horizon + 1, stop + 1))


def ultrametric_distance(
    s: Template, t: Template, horizon: int = DEFAULT_HORIZON
) -> tuple[float, float]:
    """Truncated ``sum_k |s_k - t_k| / D**k`` and a bound on the omitted tail.

    The error bound is 0 when the two sequences provably agree past ``horizon``.
    """
    if s.alphabet_size != t.alphabet_size:
        raise TemplateError(
            f"alphabet mismatch: {s.alphabet_size} vs {t.alphabet_size}"
        )
    if horizon < 1:
        raise TemplateError(f"horizon must be >= 1, got {horizon}")
    D = s.alphabet_size
    if D < 2:
        return 0.0, 0.0
    # Integer numerator over D**horizon; int / int rounds correctly once.
    num = 0
    for k in range(1, horizon + 1):
        num = num * D + abs(symbol_at(s, k) - symbol_at(t, k))
    value = num / D**horizon
    error = 0.0 if _agree_beyond(s, t, horizon) else float(D) ** -horizon
    return value, error


def periodic_approximation(s: Template, n: int) -> Template:
    """Purely periodic template repeating the first ``n`` symbols of ``s``."""
    if n < 1:
        raise TemplateError(f"approximation length must be >= 1, got {n}")
    return Template(s.alphabet_size, (), tuple(s.symbols(n)))


_LITERAL = re.compile(r"^D=(\d+):([0-9a-zA-Z]*)\|([0-9a-zA-Z]*)$")


def parse_template(text: str) -> Template:
    """Parse ``D=2:0|1`` (prefix ``0``, period ``1``); prefix may be empty."""
    text = text.strip()
    match = _LITERAL.match(text)
    if match is None:
        col = 1 if not text.startswith("D=") else (text.find(":") + 1 or len(text))
        raise TemplateError(f"malformed template literal {text!r}", column=col)
    D = int(match.group(1))
    if not 1 <= D <= 36:
        raise TemplateError(f"alphabet size {D} outside 1..36", column=3)
    syms = []
    for group in (2, 3):
        out = []
        for offset, ch in enumerate(match.group(group)):
            val = _DIGITS.index(ch.lower())
            if val >= D:
                raise TemplateError(
                    f"symbol {ch!r} not in alphabet of size {D}",
                    column=match.start(group) + offset + 1,
                )
            out.append(val)
        syms.append(tuple(out))
    if not syms[1]:
        raise TemplateError("period must be nonempty", column=match.start(3) + 1)
    return Template(D, syms[0], syms[1])


def format_template(t: Template) -> str:
    pre = "".join(_DIGITS[x] for x in t.prefix)
    per = "".join(_DIGITS[x] for x in t.period)
    return f"D={t.alphabet_size}:{pre}|{per}"
