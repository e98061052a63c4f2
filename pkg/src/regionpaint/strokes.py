"""Parametric rectangular strokes from sequenced polygons.

Small polygons map to a single stroke, the minimum-area oriented bounding
rectangle of the shape. Large polygons are first cut into grid cells,
cells are merged into area-balanced contiguous sub-regions, and each
sub-region becomes one stroke. Rectangles are canonicalized with
w >= h and the long-axis angle in [0, 180) degrees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from shapely.geometry import MultiPolygon, Polygon as ShapelyPolygon, box
from shapely.ops import unary_union

from .geometry import as_points, convex_hull, polygon_area, signed_area

_MAX_AUTO_STROKES = 64
_AREA_EPS = 1e-9


@dataclass
class DecompositionConfig:
    delta: float | None = None    # area threshold; None -> 0.5% of image area
    p_grid: float | None = None   # cell edge; None -> sqrt(delta)
    p_group: int | None = None    # strokes per region; None -> ceil(area/delta), capped

    def __post_init__(self):
        for name in ("delta", "p_grid"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive")
        if self.p_group is not None and self.p_group < 1:
            raise ValueError("p_group must be >= 1")

    def resolved(self, image_size: tuple[int, int]) -> "DecompositionConfig":
        w, h = image_size
        delta = self.delta if self.delta is not None else max(1.0, 0.005 * w * h)
        p_grid = self.p_grid if self.p_grid is not None else math.sqrt(delta)
        return DecompositionConfig(delta=delta, p_grid=p_grid, p_group=self.p_group)

    def strokes_for_area(self, area: float) -> int:
        if self.p_group is not None:
            return self.p_group
        if self.delta is None:
            raise ValueError("delta must be resolved before deriving a stroke count")
        return min(_MAX_AUTO_STROKES, max(1, math.ceil(area / self.delta)))


@dataclass
class OrientedRect:
    center: tuple[float, float]
    w: float
    h: float
    theta: float  # degrees, long-axis angle in [0, 180)

    def corners(self) -> np.ndarray:
        rad = math.radians(self.theta)
        u = np.array([math.cos(rad), math.sin(rad)])
        v = np.array([-math.sin(rad), math.cos(rad)])
        c = np.asarray(self.center)
        hw, hh = self.w / 2.0, self.h / 2.0
        return np.array([c - hw * u - hh * v, c + hw * u - hh * v,
                         c + hw * u + hh * v, c - hw * u + hh * v])

    def contains_points(self, points, tol: float = 1e-6) -> np.ndarray:
        pts = as_points(points) - np.asarray(self.center)
        rad = math.radians(self.theta)
        u = np.array([math.cos(rad), math.sin(rad)])
        v = np.array([-math.sin(rad), math.cos(rad)])
        return ((np.abs(pts @ u) <= self.w / 2.0 + tol)
                & (np.abs(pts @ v) <= self.h / 2.0 + tol))


@dataclass
class StrokeParams:
    """One rectangular stroke: center (x, y), size (w, h), angle, color."""

    x: float
    y: float
    w: float
    h: float
    theta: float
    r: int
    g: int
    b: int

    def __post_init__(self):
        if not (self.w >= self.h > 0):
            raise ValueError("stroke requires w >= h > 0")
        if not 0.0 <= self.theta < 180.0:
            raise ValueError("theta must lie in [0, 180)")
        for c in (self.r, self.g, self.b):
            if not 0 <= c <= 255:
                raise ValueError("color channels must be in [0, 255]")

    @property
    def color(self) -> tuple[int, int, int]:
        return (self.r, self.g, self.b)

    def rect(self) -> OrientedRect:
        return OrientedRect(center=(self.x, self.y), w=self.w, h=self.h, theta=self.theta)


def min_rotated_rect(polygon) -> OrientedRect:
    """Minimum-area oriented bounding rectangle by rotating calipers.

    The optimum shares a direction with some convex-hull edge, so each
    hull edge is tried as the long axis; near-ties resolve toward the
    smaller angle. Collinear input has no area and is rejected.
    """
    pts = as_points(polygon)
    hull = convex_hull(pts)
    if len(hull) < 3 or polygon_area(hull) < 1e-12:
        raise ValueError("degenerate polygon")
    dirs = np.diff(np.vstack([hull, hull[:1]]), axis=0)
    candidates = []
    for d in dirs:
        norm = math.hypot(d[0], d[1])
        if norm < 1e-12:
            continue
        c, s = d[0] / norm, d[1] / norm
        xs = hull[:, 0] * c + hull[:, 1] * s
        ys = -hull[:, 0] * s + hull[:, 1] * c
        ex = float(xs.max() - xs.min())
        ey = float(ys.max() - ys.min())
        phi = math.degrees(math.atan2(s, c))
        if ex >= ey:
            w, h, theta = ex, ey, phi % 180.0
        else:
            w, h, theta = ey, ex, (phi + 90.0) % 180.0
        theta = theta % 180.0
        cx = (xs.max() + xs.min()) / 2.0
        cy = (ys.max() + ys.min()) / 2.0
        center = (cx * c - cy * s, cx * s + cy * c)
        candidates.append((ex * ey, theta, w, h, center))
    best_area = min(c[0] for c in candidates)
    eligible = [c for c in candidates if c[0] <= best_area * (1.0 + 1e-9)]
    area, theta, w, h, center = min(eligible, key=lambda c: (c[1], c[0]))
    return OrientedRect(center=(float(center[0]), float(center[1])),
                        w=w, h=max(h, 1e-12), theta=theta)


def estimate_theta(rect: OrientedRect) -> float:
    """Long-axis angle of an oriented rectangle, degrees in [0, 180)."""
    return rect.theta


def _shapely_polygon(outer, holes=None) -> ShapelyPolygon:
    outer = np.asarray(outer)
    if len(outer) < 3:
        raise ValueError("degenerate polygon")
    rings = None
    if holes:
        rings = [np.asarray(h) for h in holes]
        rings = [h for h in rings if len(h) >= 3 and polygon_area(h) > _AREA_EPS]
    geom = ShapelyPolygon(outer, rings)
    if not geom.is_valid:
        geom = geom.buffer(0)
    return geom


def _polygon_parts(geom, depth: int = 0) -> list[np.ndarray]:
    """Decompose a shapely result into simple (hole-free) rings.

    Parts that still carry interior rings are split by a vertical line
    through a hole centroid until every piece is simple, so areas stay
    exact even for ring-shaped intersections.
    """
    if geom.is_empty:
        return []
    if isinstance(geom, ShapelyPolygon):
        parts = [geom]
    elif isinstance(geom, MultiPolygon):
        parts = list(geom.geoms)
    else:  # GeometryCollection from touching intersections
        parts = [g for g in getattr(geom, "geoms", []) if isinstance(g, ShapelyPolygon)]
    out = []
    for p in parts:
        if p.area <= _AREA_EPS:
            continue
        if p.interiors and depth < 16:
            cut_x = p.interiors[0].centroid.x
            minx, miny, maxx, maxy = p.bounds
            pad = 1.0
            left = box(minx - pad, miny - pad, cut_x, maxy + pad)
            right = box(cut_x, miny - pad, maxx + pad, maxy + pad)
            out.extend(_polygon_parts(p.intersection(left), depth + 1))
            out.extend(_polygon_parts(p.intersection(right), depth + 1))
            continue
        ring = np.asarray(p.exterior.coords)[:-1]
        if signed_area(ring) < 0:
            ring = ring[::-1]
        out.append(ring)
    return out


def grid_decompose(polygon, cfg: DecompositionConfig, holes=None) -> list[np.ndarray]:
    """Cut a polygon by an axis-aligned grid anchored at its bbox corner.

    Cells are emitted in boustrophedon row order (left-to-right, then
    right-to-left) so consecutive cells stay geometrically adjacent for
    the grouping pass. Multi-part intersections contribute one polygon
    per part.
    """
    if cfg.p_grid is None:
        raise ValueError("p_grid must be resolved before decomposition")
    pts = as_points(polygon)
    geom = _shapely_polygon(pts, holes)
    minx, miny, maxx, maxy = geom.bounds
    g = float(cfg.p_grid)
    nx = max(1, math.ceil((maxx - minx) / g - 1e-12))
    ny = max(1, math.ceil((maxy - miny) / g - 1e-12))
    cells: list[np.ndarray] = []
    for j in range(ny):
        cols = range(nx) if j % 2 == 0 else range(nx - 1, -1, -1)
        for i in cols:
            cell = box(minx + i * g, miny + j * g, minx + (i + 1) * g, miny + (j + 1) * g)
            cells.extend(_polygon_parts(geom.intersection(cell)))
    return cells


def group_cells(cells: list[np.ndarray], p_group: int) -> list[np.ndarray]:
    """Merge cells into min(p_group, len(cells)) area-balanced sub-regions.

    Consecutive cells (in the order produced by `grid_decompose`) are
    accumulated until a group reaches its share of the remaining area.
    Each sub-region is the union of its cells; a disconnected union falls
    back to the convex hull of its vertices.
    """
    if not cells:
        raise ValueError("group_cells needs at least one cell")
    k = min(p_group, len(cells))
    areas = [polygon_area(c) for c in cells]
    remaining = float(sum(areas))
    groups: list[np.ndarray] = []
    i = 0
    for gi in range(k):
        left = k - gi
        batch = [cells[i]]
        acc = areas[i]
        i += 1
        while (len(cells) - i) > (left - 1) and acc + 1e-12 < remaining / left:
            batch.append(cells[i])
            acc += areas[i]
            i += 1
        remaining -= acc
        if len(batch) == 1:
            groups.append(batch[0])
            continue
        union = unary_union([_shapely_polygon(b) for b in batch])
        parts = _polygon_parts(union)
        if len(parts) == 1:
            groups.append(parts[0])
        else:
            groups.append(convex_hull(np.vstack(batch)))
    return groups


def strokes_for_region(polygon, fill: tuple[int, int, int], cfg: DecompositionConfig,
                       holes=None) -> list[StrokeParams]:
    """Stroke set covering one polygonal region.

    Area at most delta: one stroke, the region's minimum rotated
    rectangle. Larger regions: grid decomposition, then one stroke per
    merged sub-region, in decomposition (boustrophedon) order. All
    strokes share the region fill.
    """
    if cfg.delta is None:
        raise ValueError("delta must be resolved before stroke construction")
    pts = as_points(polygon)
    area = polygon_area(pts)
    if holes:
        area -= sum(polygon_area(h) for h in holes)
    r, g, b = (int(c) for c in fill)

    def stroke_from(shape) -> StrokeParams | None:
        try:
            rect = min_rotated_rect(shape)
        except ValueError:
            return None
        return StrokeParams(x=rect.center[0], y=rect.center[1],
                            w=rect.w, h=rect.h, theta=rect.theta, r=r, g=g, b=b)

    if area <= cfg.delta:
        s = stroke_from(pts)
        return [s] if s else []
    cells = grid_decompose(pts, cfg, holes)
    if not cells:
        s = stroke_from(pts)
        return [s] if s else []
    subs = group_cells(cells, cfg.strokes_for_area(area))
    out = []
    for sub in subs:
        s = stroke_from(sub)
        if s:
            out.append(s)
    return out
