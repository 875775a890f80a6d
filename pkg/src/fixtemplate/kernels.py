"""Compiled orbit loops for batches of starting points or parameters.

Arithmetic mirrors :func:`fixtemplate.dynamics.classify_orbit` operation for
operation (square-and-multiply powers, ``abs`` for the modulus, strict
exceedance), so verdicts agree with the scalar path bit for bit.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .dynamics import MembershipConfig, ParameterPoint, escape_radius
from .templates import Template


@njit(cache=True, nogil=True)
def _ipow(z, d):
    result = z
    started = False
    base = z
    while d:
        if d & 1:
            if started:
                result = result * base
            else:
                result = base
                started = True
        d >>= 1
        if d:
            base = base * base
    return result


@njit(cache=True, nogil=True)
def _symbol(prefix, period, k):
    q = prefix.shape[0]
    if k <= q:
        return prefix[k - 1]
    return period[(k - q - 1) % period.shape[0]]


@njit(cache=True, nogil=True)
def _orbit(consts, degs, prefix, period, m, z, horizon, R, guard):
    # Squared modulus screens out the common case; the decision itself uses
    # abs() exactly like the scalar path.
    screen = R * R * (1.0 - 1e-9)
    q = prefix.shape[0]
    p = period.shape[0]
    k0 = m + 1
    pos = (k0 - q - 1) % p if k0 > q else 0
    for k in range(1, horizon + 1):
        idx = m + k
        if idx <= q:
            i = prefix[idx - 1]
        else:
            i = period[pos]
            pos += 1
            if pos == p:
                pos = 0
        d = degs[i]
        if d == 2:
            z = z * z + consts[i]
        else:
            z = _ipow(z, d) + consts[i]
        x = z.real
        y = z.imag
        if x * x + y * y >= screen or not (x == x and y == y):
            r = abs(z)
            if r > R or not r <= guard:
                return k
    return 0


@njit(cache=True, nogil=True)
def julia_block(zs, consts, degs, prefix, period, m, horizon, R, guard, out):
    for j in range(zs.shape[0]):
        out[j] = _orbit(consts, degs, prefix, period, m, zs[j], horizon, R, guard)


@njit(cache=True, nogil=True)
def mandel_block(params, degs, prefix, period, ncrit, horizon, guard, steps, times):
    """Membership for each row of ``params`` (shape n x D).

    ``steps[j]`` is 0 for members, else the escape step of the first critical
    time ``times[j]`` whose orbit escapes.
    """
    D = params.shape[1]
    for j in range(params.shape[0]):
        consts = params[j]
        R = 2.0
        for i in range(D):
            a = abs(consts[i])
            if a > R:
                R = a
        steps[j] = 0
        times[j] = -1
        for m in range(ncrit):
            k = _orbit(consts, degs, prefix, period, m, 0.0j, horizon, R, guard)
            if k:
                steps[j] = k
                times[j] = m
                break


def template_arrays(t: Template) -> tuple[np.ndarray, np.ndarray]:
    return (
        np.asarray(t.prefix, dtype=np.int64).reshape(-1),
        np.asarray(t.period, dtype=np.int64),
    )


def membership_batch(
    params: np.ndarray, degrees, t: Template, cfg: MembershipConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized membership over rows of complex ``params`` (n x D)."""
    params = np.ascontiguousarray(params, dtype=np.complex128)
    if params.ndim != 2 or params.shape[1] != t.alphabet_size:
        raise ValueError(f"params must have shape (n, {t.alphabet_size})")
    n = params.shape[0]
    steps = np.zeros(n, dtype=np.int32)
    times = np.full(n, -1, dtype=np.int32)
    prefix, period = template_arrays(t)
    ncrit = 1 if cfg.critical_times == "zero" else t.critical_span
    mandel_block(
        params,
        np.asarray(degrees, dtype=np.int64),
        prefix,
        period,
        ncrit,
        cfg.max_iterations,
        cfg.overflow_guard,
        steps,
        times,
    )
    return steps, times


def escape_steps(
    zs: np.ndarray, p: ParameterPoint, t: Template, m: int, horizon: int, guard: float
) -> np.ndarray:
    zs = np.ascontiguousarray(zs, dtype=np.complex128).reshape(-1)
    out = np.zeros(zs.shape[0], dtype=np.int32)
    prefix, period = template_arrays(t)
    julia_block(
        zs,
        np.asarray(p.constants, dtype=np.complex128),
        np.asarray(p.degrees, dtype=np.int64),
        prefix,
        period,
        m,
        horizon,
        escape_radius(p),
        guard,
        out,
    )
    return out
