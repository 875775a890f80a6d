import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import ndimage

from fixtemplate.metrics import (
    CSV_HEADER,
    brute_force_distance,
    directed_distance,
    distance_report,
    distance_transform,
    hausdorff_distance,
    point_to_set_distance,
    quantization_bound,
)
from fixtemplate.raster import Raster, Window, WindowError

UNIT3 = Window(0, 3, 0, 3, 3, 3)


def raster(mask, window=None, meta=None):
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    window = window or Window(0, w, 0, h, w, h)
    return Raster(window, np.where(mask, 0, 1), meta or {})


def single(window, i, j):
    m = np.zeros((window.height, window.width), dtype=bool)
    m[j, i] = True
    return raster(m, window)


def test_all_inside_field_zero():
    assert (distance_transform(raster(np.ones((4, 6)))).values == 0).all()


def test_center_pixel_corners():
    f = distance_transform(single(UNIT3, 1, 1)).values
    assert f[0, 0] == f[2, 2] == f[0, 2] == math.sqrt(2)
    assert f[0, 1] == 1.0 and f[1, 1] == 0.0


def test_empty_field_infinite():
    assert np.isinf(distance_transform(raster(np.zeros((3, 5)))).values).all()


masks = st.integers(1, 32).flatmap(
    lambda h: st.integers(1, 32).flatmap(lambda w: arrays(bool, (h, w)))
)
pitches = st.sampled_from([(1, 1), (0.25, 0.25), (0.1, 0.37), (3.0, 0.5)])


@given(masks, pitches)
def test_edt_equals_brute_force(mask, pitch):
    h, w = mask.shape
    win = Window(0, pitch[0] * w, 0, pitch[1] * h, w, h)
    r = raster(mask, win)
    assert np.array_equal(distance_transform(r).values, brute_force_distance(r))


@settings(max_examples=50)
@given(masks)
def test_edt_matches_scipy(mask):
    if not mask.any():
        return
    h, w = mask.shape
    win = Window(0, 0.5 * w, 0, 2.0 * h, w, h)
    ours = distance_transform(raster(mask, win)).values
    ref = ndimage.distance_transform_edt(~mask, sampling=(2.0, 0.5))
    np.testing.assert_allclose(ours, ref, rtol=1e-12, atol=1e-12)


@given(masks)
def test_edt_zero_exactly_on_inside_and_lipschitz(mask):
    if not mask.any():
        return
    f = distance_transform(raster(mask)).values
    assert ((f == 0) == mask).all()
    assert (np.abs(np.diff(f, axis=0)) <= 1 + 1e-12).all()
    assert (np.abs(np.diff(f, axis=1)) <= 1 + 1e-12).all()


def test_directed_examples():
    a = single(UNIT3, 0, 0)
    b = single(UNIT3, 2, 1)
    assert directed_distance(a, a) == 0
    both = raster(a.inside | b.inside, UNIT3)
    assert directed_distance(a, both) == 0
    assert directed_distance(a, b) == math.hypot(2, 1)
    assert directed_distance(raster(np.zeros((3, 3)), UNIT3), b) == 0
    assert directed_distance(a, raster(np.zeros((3, 3)), UNIT3)) == math.inf


def test_hausdorff_examples():
    a = single(UNIT3, 0, 0)
    big = raster(np.ones((3, 3)), UNIT3)
    assert hausdorff_distance(big, big) == 0
    assert hausdorff_distance(a, big) == directed_distance(big, a) == math.hypot(2, 2)
    assert hausdorff_distance(a, single(UNIT3, 2, 0)) == 2


def test_window_and_slice_mismatch():
    a = single(UNIT3, 0, 0)
    with pytest.raises(WindowError):
        directed_distance(a, single(Window(0, 3, 0, 3, 3, 4), 0, 0))
    m = a.inside
    with pytest.raises(WindowError):
        hausdorff_distance(raster(m, UNIT3, {"vary": 0}), raster(m, UNIT3, {"vary": 1}))


@given(st.lists(arrays(bool, (12, 9)), min_size=3, max_size=3))
def test_hausdorff_triangle(ms):
    rs = [raster(m, Window(-1, 1, -1, 1, 9, 12)) for m in ms]
    if not all(m.any() for m in ms):
        return
    ab = hausdorff_distance(rs[0], rs[1])
    bc = hausdorff_distance(rs[1], rs[2])
    assert hausdorff_distance(rs[0], rs[2]) <= ab + bc + 1e-12


@given(arrays(bool, (10, 10)), arrays(bool, (10, 10)))
def test_directed_zero_iff_subset(ma, mb):
    if not mb.any():
        return
    d = directed_distance(raster(ma), raster(mb))
    assert (d == 0) == bool((~ma | mb).all())


def test_point_to_set_examples():
    a = single(UNIT3, 1, 1)
    assert point_to_set_distance(1.5 + 1.5j, a) == 0
    assert point_to_set_distance(1.5 + 1.5j, raster(np.zeros((3, 3)), UNIT3)) == math.inf
    corner = single(UNIT3, 0, 0)
    assert point_to_set_distance(1.5 + 1.5j, corner) == math.sqrt(2)
    with pytest.raises(WindowError):
        point_to_set_distance(5 + 0j, a)


def test_report_and_csv():
    w = Window(-1.25, 1.25, -1.25, 1.25, 300, 300)
    assert quantization_bound(w) == pytest.approx(0.011785113019775792, abs=1e-15)
    a, b = single(w, 3, 4), single(w, 3, 7)
    rep = distance_report(a, b, "lim", "N20")
    assert rep.d_h == pytest.approx(3 * 2.5 / 300)
    assert CSV_HEADER.count(",") == rep.csv_row().count(",") == 5
    assert rep.csv_row().startswith("lim,N20,")
