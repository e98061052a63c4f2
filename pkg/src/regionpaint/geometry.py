"""2D polygon primitives shared by the vector, sequencing, and stroke stages.

Coordinates are (x, y) in image pixel space with y growing downward.
Orientation language follows the shoelace sign under that convention: a
loop whose signed area is positive is called counterclockwise here.
"""

from __future__ import annotations

import numpy as np


def as_points(points) -> np.ndarray:
    """Coerce input to an (N, 2) float64 vertex array."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"expected (N, 2) points, got shape {pts.shape}")
    return pts


def signed_area(points) -> float:
    pts = as_points(points)
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def polygon_area(points) -> float:
    """Unsigned polygon area, |shoelace sum| / 2."""
    return abs(signed_area(points))


def polygon_centroid(points) -> tuple[float, float]:
    """Area-weighted centroid via the shoelace moment formula.

    Raises ValueError for polygons of (numerically) zero area, which have
    no well-defined centroid.
    """
    pts = as_points(points)
    x, y = pts[:, 0], pts[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    a = 0.5 * float(np.sum(cross))
    if abs(a) < 1e-12:
        raise ValueError("zero-area polygon has no centroid")
    cx = float(np.sum((x + xn) * cross)) / (6.0 * a)
    cy = float(np.sum((y + yn) * cross)) / (6.0 * a)
    return cx, cy


def polyline_length(points, closed: bool = False) -> float:
    pts = as_points(points)
    if closed:
        pts = np.vstack([pts, pts[:1]])
    return float(np.sum(np.hypot(np.diff(pts[:, 0]), np.diff(pts[:, 1]))))


def _cross2(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points) -> np.ndarray:
    """Monotone-chain convex hull, counterclockwise, no repeated endpoint.

    Collinear points on the hull boundary are dropped.
    """
    pts = np.unique(as_points(points), axis=0)  # lexicographic sort
    if len(pts) <= 2:
        return pts

    def build(seq):
        chain: list[np.ndarray] = []
        for p in seq:
            while len(chain) >= 2 and _cross2(chain[-2], chain[-1], p) <= 0:
                chain.pop()
            chain.append(p)
        return chain

    lower = build(pts)
    upper = build(pts[::-1])
    return np.array(lower[:-1] + upper[:-1])


def rotate_points(points, degrees: float, center=(0.0, 0.0)) -> np.ndarray:
    """Rotate points by `degrees` about `center` (positive = +x toward +y)."""
    pts = as_points(points)
    rad = np.deg2rad(degrees)
    c, s = np.cos(rad), np.sin(rad)
    ctr = np.asarray(center, dtype=np.float64)
    d = pts - ctr
    return np.column_stack([d[:, 0] * c - d[:, 1] * s,
                            d[:, 0] * s + d[:, 1] * c]) + ctr


def point_in_polygon(point, polygon) -> bool:
    """Even-odd rule point-in-polygon test."""
    px, py = float(point[0]), float(point[1])
    pts = as_points(polygon)
    x, y = pts[:, 0], pts[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    crosses = ((y <= py) != (yn <= py))
    with np.errstate(divide="ignore", invalid="ignore"):
        xi = x + (py - y) * (xn - x) / (yn - y)
    return bool(np.sum(crosses & (xi > px)) % 2)


def points_to_segment_distance(points, a, b) -> np.ndarray:
    """Distance from each point to the line segment a-b."""
    pts = as_points(points)
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    ab = b - a
    denom = float(ab @ ab)
    if denom < 1e-24:
        return np.hypot(pts[:, 0] - a[0], pts[:, 1] - a[1])
    t = np.clip(((pts - a) @ ab) / denom, 0.0, 1.0)
    proj = a + t[:, None] * ab
    return np.hypot(pts[:, 0] - proj[:, 0], pts[:, 1] - proj[:, 1])


def simplify_polyline(points, tolerance: float) -> list[int]:
    """Douglas-Peucker on an open polyline; returns kept vertex indices."""
    pts = as_points(points)
    n = len(pts)
    if n <= 2:
        return list(range(n))
    keep = np.zeros(n, dtype=bool)
    keep[0] = keep[-1] = True
    stack = [(0, n - 1)]
    while stack:
        i, j = stack.pop()
        if j <= i + 1:
            continue
        d = points_to_segment_distance(pts[i + 1:j], pts[i], pts[j])
        k = int(np.argmax(d))
        if d[k] > tolerance:
            m = i + 1 + k
            keep[m] = True
            stack.append((i, m))
            stack.append((m, j))
    return list(np.nonzero(keep)[0])


def simplify_closed(points, tolerance: float) -> list[int]:
    """Douglas-Peucker for a closed loop; returns kept vertex indices.

    The loop is split at vertex 0 and at the vertex farthest from it, so
    the result always keeps at least two anchors.
    """
    pts = as_points(points)
    n = len(pts)
    if n <= 3:
        return list(range(n))
    far = int(np.argmax(np.hypot(pts[:, 0] - pts[0, 0], pts[:, 1] - pts[0, 1])))
    if far == 0:
        far = n // 2
    first = simplify_polyline(pts[: far + 1], tolerance)
    wrap = np.vstack([pts[far:], pts[:1]])
    second = simplify_polyline(wrap, tolerance)
    idx = sorted(set(first) | {(far + k) % n for k in second[:-1]})
    return idx
