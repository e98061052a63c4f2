import numpy as np
import pytest

from regionpaint.curves import (CONTROL_POINT_COUNTS, CurveKind, CurveSegment,
                                curve_points, fit_closed_polyline,
                                flatten_curve, max_deviation)
from regionpaint.vectorization import TraceConfig, fit_curves

from conftest import fourier_blob


def test_control_point_cardinality_enforced():
    good = {
        CurveKind.LINE: 2,
        CurveKind.QUADRATIC: 3,
        CurveKind.CUBIC: 4,
        CurveKind.CIRCULAR_ARC: 3,
        CurveKind.ELLIPTICAL_ARC: 3,
    }
    assert good == CONTROL_POINT_COUNTS
    pts4 = np.array([(0, 0), (1, 0), (2, 1), (3, 0)], float)
    for kind, n in good.items():
        kwargs = {"axis_ratio": 0.5} if kind is CurveKind.ELLIPTICAL_ARC else {}
        CurveSegment(kind, pts4[:n], **kwargs)  # accepted
        with pytest.raises(ValueError):
            CurveSegment(kind, pts4[: n - 1], **kwargs)


def test_elliptical_arc_needs_ratio():
    pts = np.array([(0, 0), (1, 1), (2, 0)], float)
    with pytest.raises(ValueError):
        CurveSegment(CurveKind.ELLIPTICAL_ARC, pts)
    with pytest.raises(ValueError):
        CurveSegment(CurveKind.LINE, pts[:2], axis_ratio=2.0)


def test_flatten_quadratic_hits_midpoint():
    # de Casteljau midpoint: B(0.5) = 0.25 P0 + 0.5 P1 + 0.25 P2 = (1, 1)
    seg = CurveSegment(CurveKind.QUADRATIC, np.array([(0, 0), (1, 2), (2, 0)], float))
    tol = 0.05
    pts = flatten_curve(seg, tol)
    d = np.min(np.hypot(pts[:, 0] - 1.0, pts[:, 1] - 1.0))
    assert d <= tol


def test_flatten_circular_arc_radial_deviation():
    # quarter circle radius 10 through (10,0),(√50,√50),(0,10)
    r = 10.0
    ctrl = np.array([(r, 0), (r / np.sqrt(2), r / np.sqrt(2)), (0, r)])
    seg = CurveSegment(CurveKind.CIRCULAR_ARC, ctrl)
    pts = flatten_curve(seg, 0.1)
    radial = np.abs(np.hypot(pts[:, 0], pts[:, 1]) - r)
    assert radial.max() <= 0.1
    # chord sagitta stays below tolerance too
    mids = 0.5 * (pts[:-1] + pts[1:])
    sagitta = np.abs(np.hypot(mids[:, 0], mids[:, 1]) - r)
    assert sagitta.max() <= 0.1 + 1e-9


def test_flatten_elliptical_arc():
    # half of an axis-aligned ellipse with semi-axes (10, 5): ratio 0.5
    t = np.array([0.0, np.pi / 2, np.pi])
    pts3 = np.column_stack([10 * np.cos(t), 5 * np.sin(t)])
    seg = CurveSegment(CurveKind.ELLIPTICAL_ARC, pts3, axis_ratio=0.5)
    flat = flatten_curve(seg, 0.05)
    # all flattened points satisfy the ellipse equation within tolerance
    vals = (flat[:, 0] / 10) ** 2 + (flat[:, 1] / 5) ** 2
    assert np.abs(vals - 1.0).max() < 0.05
    assert np.allclose(flat[0], pts3[0]) and np.allclose(flat[-1], pts3[-1])


def test_curve_points_line():
    seg = CurveSegment(CurveKind.LINE, np.array([(0, 0), (4, 2)], float))
    pts = curve_points(seg, np.array([0.0, 0.5, 1.0]))
    assert np.allclose(pts, [(0, 0), (2, 1), (4, 2)])


def test_fit_rectangle_gives_four_lines():
    pts = []
    for x in range(0, 10):
        pts.append((x, 0))
    for y in range(0, 6):
        pts.append((10, y))
    for x in range(10, 0, -1):
        pts.append((x, 6))
    for y in range(6, 0, -1):
        pts.append((0, y))
    segs = fit_curves(np.array(pts, float), TraceConfig())
    assert [s.kind for s in segs] == [CurveKind.LINE] * 4
    assert max_deviation(np.array(pts, float), segs) <= 1e-9


def test_fit_semicircle_few_cubics():
    r = 20.0
    th = np.linspace(0, np.pi, 64)
    arc = np.column_stack([r * np.cos(th), r * np.sin(th)])
    segs = fit_curves(arc, TraceConfig(fit_tolerance=0.5))
    cubics = [s for s in segs if s.kind is CurveKind.CUBIC]
    assert 1 <= len(cubics) <= 2
    assert max_deviation(arc, segs) <= 0.5


def test_fit_collinear_run_single_line():
    tri = np.array([(0, 0), (2, 0), (4, 0), (6, 0), (8, 0), (4, 6)], float)
    segs = fit_curves(tri, TraceConfig())
    kinds = [s.kind for s in segs]
    assert kinds == [CurveKind.LINE] * 3
    # the collinear run collapses to one line spanning its endpoints
    base = next(s for s in segs if np.allclose(s.start, (0, 0)))
    assert np.allclose(base.end, (8, 0))


def test_fit_degenerate_contour_rejected():
    with pytest.raises(ValueError, match="degenerate"):
        fit_curves(np.array([(0, 0), (1, 1), (2, 2)], float), TraceConfig())


def test_fit_path_is_closed(rng):
    blob = fourier_blob(rng)
    segs = fit_closed_polyline(blob, 1.0, 60.0)
    for a, b in zip(segs, segs[1:]):
        assert np.allclose(a.end, b.start, atol=1e-9)
    assert np.allclose(segs[-1].end, segs[0].start, atol=1e-9)


def test_fit_deviation_bound_random_blobs(rng):
    for _ in range(10):
        blob = fourier_blob(rng)
        segs = fit_closed_polyline(blob, 1.0, 60.0)
        assert max_deviation(blob, segs) <= 1.0
