import os

import numpy as np
import pytest
from hypothesis import settings

from fixtemplate.dynamics import ParameterPoint
from fixtemplate.templates import Template, parse_template

settings.register_profile("default", max_examples=200, deadline=None)
settings.register_profile("ci", max_examples=50, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

EPS = 1 / 256
C0 = 0.5 - EPS
C1 = 0.25 - EPS


@pytest.fixture
def limit_template() -> Template:
    return parse_template("D=2:0|1")


@pytest.fixture
def counterexample_point() -> ParameterPoint:
    return ParameterPoint((C0, C1), (2, 2), 2)


def classical_escape(c: np.ndarray, horizon: int) -> tuple[np.ndarray, np.ndarray]:
    """Independent single-map escape-time oracle for z**2 + c from z = 0.

    Vectorized over ``c``; radius max(2, |c|), strict exceedance. Returns the
    escape step (0 if bounded) and the largest modulus seen before escape.
    Written on separate real and imaginary arrays (x' = x*x - y*y + a,
    y' = 2*x*y + b) because numpy's complex multiply may fuse the real part
    into an FMA, which changes the last bit and lets chaotic orbits drift.
    """
    c = np.asarray(c, dtype=np.complex128)
    a, b = c.real.copy(), c.imag.copy()
    R = np.maximum(2.0, np.hypot(a, b))
    x = np.zeros_like(a)
    y = np.zeros_like(b)
    steps = np.zeros(c.shape, dtype=np.int64)
    peak = np.zeros(c.shape)
    live = np.ones(c.shape, dtype=bool)
    for k in range(1, horizon + 1):
        xl, yl = x[live], y[live]
        x[live] = (xl * xl - yl * yl) + a[live]
        y[live] = (xl * yl + yl * xl) + b[live]
        mod = np.hypot(x, y)
        esc = live & (mod > R)
        steps[esc] = k
        live &= ~esc
        peak[live] = np.maximum(peak[live], mod[live])
        if not live.any():
            break
    return steps, peak
