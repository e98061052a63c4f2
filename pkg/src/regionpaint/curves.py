"""Parametric curve segments: evaluation, flattening, and polyline fitting.

The fitter produces piecewise Line / quadratic / cubic Bezier paths from
closed polylines using least-squares cubic fitting with iterative
reparameterization and recursive subdivision; corners split the input
into independently fitted runs. Circular and elliptical arcs are accepted
on input (importers, hand-written programs) and flattened by angular
stepping, but the fitter never emits them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .geometry import as_points, points_to_segment_distance, simplify_closed


class CurveKind(str, Enum):
    LINE = "line"
    QUADRATIC = "quadratic"
    CUBIC = "cubic"
    CIRCULAR_ARC = "arc"
    ELLIPTICAL_ARC = "earc"


CONTROL_POINT_COUNTS = {
    CurveKind.LINE: 2,
    CurveKind.QUADRATIC: 3,
    CurveKind.CUBIC: 4,
    CurveKind.CIRCULAR_ARC: 3,
    CurveKind.ELLIPTICAL_ARC: 3,
}


@dataclass
class CurveSegment:
    """One typed curve piece.

    Control points are (x, y) image coordinates. Arcs store
    (start, on-arc midpoint, end); elliptical arcs additionally carry the
    axis ratio of an axis-aligned ellipse (vertical semi-axis divided by
    horizontal), so `axis_ratio == 1` degenerates to a circular arc.
    """

    kind: CurveKind
    control_points: np.ndarray
    axis_ratio: float | None = None

    def __post_init__(self):
        self.kind = CurveKind(self.kind)
        self.control_points = as_points(self.control_points)
        want = CONTROL_POINT_COUNTS[self.kind]
        if len(self.control_points) != want:
            raise ValueError(
                f"{self.kind.value} needs {want} control points, got {len(self.control_points)}")
        if self.kind is CurveKind.ELLIPTICAL_ARC:
            if self.axis_ratio is None or self.axis_ratio <= 0:
                raise ValueError("elliptical arc requires a positive axis_ratio")
        elif self.axis_ratio is not None:
            raise ValueError(f"{self.kind.value} does not take an axis_ratio")

    @property
    def start(self) -> np.ndarray:
        return self.control_points[0]

    @property
    def end(self) -> np.ndarray:
        return self.control_points[-1]


def _circle_through(p0, p1, p2) -> tuple[np.ndarray, float]:
    """Center and radius of the circle through three points."""
    ax, ay = p0
    bx, by = p1
    cx, cy = p2
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if abs(d) < 1e-12:
        raise ValueError("collinear points do not define a circle")
    a2, b2, c2 = ax * ax + ay * ay, bx * bx + by * by, cx * cx + cy * cy
    ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d
    uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d
    center = np.array([ux, uy])
    return center, float(np.hypot(ax - ux, ay - uy))


def _arc_angles(center, p0, pm, p1) -> tuple[float, float]:
    """Start angle and signed sweep taking the arc through the midpoint."""
    a0 = math.atan2(p0[1] - center[1], p0[0] - center[0])
    am = math.atan2(pm[1] - center[1], pm[0] - center[0])
    a1 = math.atan2(p1[1] - center[1], p1[0] - center[0])
    two_pi = 2.0 * math.pi
    d1 = (a1 - a0) % two_pi
    dm = (am - a0) % two_pi
    if dm <= d1 + 1e-12:
        return a0, d1            # counterclockwise reaches pm first
    return a0, d1 - two_pi       # otherwise sweep the other way


def curve_points(seg: CurveSegment, ts: np.ndarray) -> np.ndarray:
    """Evaluate a curve at parameter values in [0, 1]."""
    ts = np.asarray(ts, dtype=np.float64)
    p = seg.control_points
    if seg.kind is CurveKind.LINE:
        return p[0] + ts[:, None] * (p[1] - p[0])
    if seg.kind is CurveKind.QUADRATIC:
        u = (1.0 - ts)[:, None]
        t = ts[:, None]
        return u * u * p[0] + 2 * u * t * p[1] + t * t * p[2]
    if seg.kind is CurveKind.CUBIC:
        u = (1.0 - ts)[:, None]
        t = ts[:, None]
        return (u ** 3 * p[0] + 3 * u ** 2 * t * p[1]
                + 3 * u * t ** 2 * p[2] + t ** 3 * p[3])
    # arcs: map to circle space, interpolate the angle, map back
    ratio = seg.axis_ratio if seg.kind is CurveKind.ELLIPTICAL_ARC else 1.0
    scale = np.array([1.0, 1.0 / ratio])
    q = p * scale
    center, radius = _circle_through(q[0], q[1], q[2])
    a0, sweep = _arc_angles(center, q[0], q[1], q[2])
    ang = a0 + sweep * ts
    pts = np.column_stack([center[0] + radius * np.cos(ang),
                           center[1] + radius * np.sin(ang)])
    return pts / scale


def flatten_curve(seg: CurveSegment, tol: float) -> np.ndarray:
    """Approximate a curve by a polyline within chord deviation `tol`.

    Beziers subdivide recursively (de Casteljau) until the control points
    hug the chord; arcs use angular steps bounded by the sagitta.
    Endpoints are always included.
    """
    p = seg.control_points
    if seg.kind is CurveKind.LINE:
        return p.copy()
    if seg.kind in (CurveKind.QUADRATIC, CurveKind.CUBIC):
        out = [p[0]]
        _flatten_bezier(p, tol, out, 0)
        return np.array(out)
    ratio = seg.axis_ratio if seg.kind is CurveKind.ELLIPTICAL_ARC else 1.0
    scale = np.array([1.0, 1.0 / ratio])
    q = p * scale
    center, radius = _circle_through(q[0], q[1], q[2])
    a0, sweep = _arc_angles(center, q[0], q[1], q[2])
    # one chord per angular step keeps the sagitta under tol (scaled
    # conservatively when the ellipse stretches vertically)
    eff_tol = tol / max(1.0, ratio)
    if radius <= eff_tol:
        step = abs(sweep)
    else:
        step = 2.0 * math.acos(max(-1.0, 1.0 - eff_tol / radius))
    n = max(2, int(math.ceil(abs(sweep) / max(step, 1e-6))) + 1)
    ang = a0 + sweep * np.linspace(0.0, 1.0, n)
    pts = np.column_stack([center[0] + radius * np.cos(ang),
                           center[1] + radius * np.sin(ang)])
    return pts / scale


def _flatten_bezier(ctrl: np.ndarray, tol: float, out: list, depth: int) -> None:
    a, b = ctrl[0], ctrl[-1]
    inner = ctrl[1:-1]
    flat = float(np.max(points_to_segment_distance(inner, a, b))) <= tol
    if flat or depth >= 24:
        out.append(b)
        return
    left, right = _split_bezier(ctrl)
    _flatten_bezier(left, tol, out, depth + 1)
    _flatten_bezier(right, tol, out, depth + 1)


def _split_bezier(ctrl: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """de Casteljau split at t = 0.5 for quadratic or cubic control nets."""
    if len(ctrl) == 3:
        m01 = 0.5 * (ctrl[0] + ctrl[1])
        m12 = 0.5 * (ctrl[1] + ctrl[2])
        mid = 0.5 * (m01 + m12)
        return np.array([ctrl[0], m01, mid]), np.array([mid, m12, ctrl[2]])
    m01 = 0.5 * (ctrl[0] + ctrl[1])
    m12 = 0.5 * (ctrl[1] + ctrl[2])
    m23 = 0.5 * (ctrl[2] + ctrl[3])
    a = 0.5 * (m01 + m12)
    b = 0.5 * (m12 + m23)
    mid = 0.5 * (a + b)
    return np.array([ctrl[0], m01, a, mid]), np.array([mid, b, m23, ctrl[3]])


# ---------------------------------------------------------------------------
# Least-squares fitting of closed polylines
# ---------------------------------------------------------------------------

def fit_closed_polyline(points: np.ndarray, tolerance: float,
                        corner_angle_deg: float) -> list[CurveSegment]:
    """Fit a closed polyline with a closed piecewise Line/QBC/CBC path.

    Corner vertices (turn angle above the threshold on a simplified copy
    of the loop) become hard segment boundaries; every input vertex ends
    up within `tolerance` of its fitted piece.
    """
    pts = as_points(points)
    if np.allclose(pts[0], pts[-1]):
        pts = pts[:-1]
    # collapse consecutive duplicates
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = np.any(np.abs(np.diff(pts, axis=0)) > 1e-12, axis=1)
    pts = pts[keep]
    n = len(pts)
    if n < 3:
        raise ValueError("degenerate contour")
    corners = _find_corners(pts, tolerance, corner_angle_deg)
    if len(corners) < 3:
        # too few hard boundaries for a non-degenerate closed path: pad
        # with evenly spaced anchors so at least three runs remain
        anchor = corners[0] if corners else 0
        extra = {(anchor + n // 3) % n, (anchor + (2 * n) // 3) % n}
        if len(corners) == 2:
            i, j = corners
            gap_a = (j - i) % n
            gap_b = n - gap_a
            if gap_a >= gap_b:
                extra = {(i + gap_a // 2) % n}
            else:
                extra = {(j + gap_b // 2) % n}
        corners = sorted(set(corners) | extra)
    segments: list[CurveSegment] = []
    for i, c0 in enumerate(corners):
        c1 = corners[(i + 1) % len(corners)]
        run = _cyclic_slice(pts, c0, c1)
        segments.extend(_fit_run(run, tolerance))
    return segments


def _cyclic_slice(pts: np.ndarray, i: int, j: int) -> np.ndarray:
    if i < j:
        return pts[i:j + 1]
    return np.vstack([pts[i:], pts[:j + 1]])


def _find_corners(pts: np.ndarray, tolerance: float, corner_angle_deg: float) -> list[int]:
    """Corner indices detected on a Douglas-Peucker-simplified copy."""
    idx = simplify_closed(pts, max(0.3, 0.9 * tolerance))
    if len(idx) < 3:
        return []
    sel = pts[idx]
    prev = sel - np.roll(sel, 1, axis=0)
    nxt = np.roll(sel, -1, axis=0) - sel
    pn = np.linalg.norm(prev, axis=1)
    nn = np.linalg.norm(nxt, axis=1)
    ok = (pn > 1e-12) & (nn > 1e-12)
    cosang = np.ones(len(sel))
    cosang[ok] = np.clip(np.sum(prev[ok] * nxt[ok], axis=1) / (pn[ok] * nn[ok]), -1.0, 1.0)
    turn = np.degrees(np.arccos(cosang))
    return [idx[k] for k in range(len(idx)) if turn[k] >= corner_angle_deg]


def _tangent(pts: np.ndarray, at_start: bool) -> np.ndarray:
    k = min(3, len(pts) - 1)
    v = (pts[k] - pts[0]) if at_start else (pts[-1 - k] - pts[-1])
    norm = float(np.hypot(v[0], v[1]))
    if norm < 1e-12:
        v = (pts[1] - pts[0]) if at_start else (pts[-2] - pts[-1])
        norm = float(np.hypot(v[0], v[1])) or 1.0
    return v / norm


def _fit_run(pts: np.ndarray, tol: float, depth: int = 0) -> list[CurveSegment]:
    n = len(pts)
    if n <= 2:
        return [CurveSegment(CurveKind.LINE, pts[[0, -1]])]
    chord_dev = points_to_segment_distance(pts[1:-1], pts[0], pts[-1])
    if float(np.max(chord_dev)) <= tol:
        return [CurveSegment(CurveKind.LINE, pts[[0, -1]])]
    if n == 3:
        # quadratic interpolating the middle vertex at t = 0.5
        mid_ctrl = 2.0 * pts[1] - 0.5 * (pts[0] + pts[2])
        return [CurveSegment(CurveKind.QUADRATIC, np.array([pts[0], mid_ctrl, pts[2]]))]
    t_left = _tangent(pts, True)
    t_right = _tangent(pts, False)
    u = _chord_lengths(pts)
    split_at = n // 2
    for attempt in range(4):
        ctrl = _lsq_cubic(pts, u, t_left, t_right)
        errs = np.linalg.norm(_bezier_at(ctrl, u) - pts, axis=1)
        worst = int(np.argmax(errs))
        if errs[worst] <= tol:
            return [CurveSegment(CurveKind.CUBIC, ctrl)]
        split_at = worst
        if attempt == 0 and errs[worst] > 100.0 * tol:
            break
        u = _reparameterize(ctrl, pts, u)
    split_at = min(max(split_at, 1), n - 2)
    if depth > 32:
        return [CurveSegment(CurveKind.LINE, pts[[0, -1]])]
    return (_fit_run(pts[: split_at + 1], tol, depth + 1)
            + _fit_run(pts[split_at:], tol, depth + 1))


def _chord_lengths(pts: np.ndarray) -> np.ndarray:
    d = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(pts, axis=0), axis=1))])
    return d / d[-1]


def _bezier_at(ctrl: np.ndarray, ts: np.ndarray) -> np.ndarray:
    u = (1.0 - ts)[:, None]
    t = ts[:, None]
    return (u ** 3 * ctrl[0] + 3 * u ** 2 * t * ctrl[1]
            + 3 * u * t ** 2 * ctrl[2] + t ** 3 * ctrl[3])


def _lsq_cubic(pts: np.ndarray, u: np.ndarray, t_left: np.ndarray,
               t_right: np.ndarray) -> np.ndarray:
    """Least-squares cubic with endpoint positions and tangents pinned.

    Solves for the two tangent magnitudes; degenerate systems and wild
    magnitudes fall back to the one-third-chord heuristic.
    """
    p0, p3 = pts[0], pts[-1]
    b0 = (1 - u) ** 3
    b1 = 3 * (1 - u) ** 2 * u
    b2 = 3 * (1 - u) * u ** 2
    b3 = u ** 3
    a1 = b1[:, None] * t_left[None, :]
    a2 = b2[:, None] * t_right[None, :]
    rhs = pts - (b0 + b1)[:, None] * p0 - (b2 + b3)[:, None] * p3
    c11 = float(np.sum(a1 * a1))
    c12 = float(np.sum(a1 * a2))
    c22 = float(np.sum(a2 * a2))
    x1 = float(np.sum(a1 * rhs))
    x2 = float(np.sum(a2 * rhs))
    det = c11 * c22 - c12 * c12
    chord = float(np.linalg.norm(p3 - p0)) or 1.0
    alpha1 = alpha2 = chord / 3.0
    if abs(det) > 1e-12:
        s1 = (x1 * c22 - x2 * c12) / det
        s2 = (c11 * x2 - c12 * x1) / det
        if 1e-6 * chord < s1 < 3.0 * chord:
            alpha1 = s1
        if 1e-6 * chord < s2 < 3.0 * chord:
            alpha2 = s2
    return np.array([p0, p0 + alpha1 * t_left, p3 + alpha2 * t_right, p3])


def _reparameterize(ctrl: np.ndarray, pts: np.ndarray, u: np.ndarray) -> np.ndarray:
    """One Newton-Raphson step moving each parameter toward its foot point."""
    b = _bezier_at(ctrl, u)
    d1_ctrl = 3.0 * np.diff(ctrl, axis=0)
    d2_ctrl = 2.0 * np.diff(d1_ctrl, axis=0)
    uu = u[:, None]
    d1 = ((1 - uu) ** 2 * d1_ctrl[0] + 2 * (1 - uu) * uu * d1_ctrl[1] + uu ** 2 * d1_ctrl[2])
    d2 = (1 - uu) * d2_ctrl[0] + uu * d2_ctrl[1]
    diff = b - pts
    num = np.sum(diff * d1, axis=1)
    den = np.sum(d1 * d1, axis=1) + np.sum(diff * d2, axis=1)
    step = np.where(np.abs(den) > 1e-12, num / np.where(den == 0, 1, den), 0.0)
    out = np.clip(u - step, 0.0, 1.0)
    out[0], out[-1] = 0.0, 1.0
    # keep parameters monotone; fall back to the previous values otherwise
    return out if np.all(np.diff(out) >= 0) else u


def max_deviation(points: np.ndarray, segments: list[CurveSegment],
                  samples: int = 200) -> float:
    """Largest distance from any input vertex to the fitted path.

    Brute-force: distance to densely sampled curve polylines. Used by
    tests as the independent check on the fitter's tolerance contract.
    """
    pts = as_points(points)
    poly = []
    for seg in segments:
        poly.append(curve_points(seg, np.linspace(0, 1, samples)))
    chain = np.vstack(poly)
    worst = 0.0
    for p in pts:
        d2 = np.sum((chain - p) ** 2, axis=1)
        i = int(np.argmin(d2))
        best = math.sqrt(float(d2[i]))
        for j in (i - 1, i):
            if 0 <= j < len(chain) - 1:
                seg_d = points_to_segment_distance(p[None, :], chain[j], chain[j + 1])
                best = min(best, float(seg_d[0]))
        worst = max(worst, best)
    return worst
