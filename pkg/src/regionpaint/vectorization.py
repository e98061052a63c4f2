"""Raster segments to filled vector regions.

Pipeline per segment: quantize its pixels into flat color layers, trace
each layer's boundary loops, then fit the loops with piecewise curves.
Each connected component becomes one region (outer path plus any hole
loops) carrying its layer's fill color.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import curves as _curves
from .curves import CurveSegment, fit_closed_polyline, flatten_curve
from .geometry import point_in_polygon, polygon_area, polygon_centroid, signed_area
from .segmentation import SegmentMask
from .tracing import trace_contours

DEFAULT_FLATTEN_TOL = 0.25


@dataclass
class TraceConfig:
    colors_per_segment: int = 8
    fit_tolerance: float = 1.0          # px
    corner_angle_threshold: float = 60.0  # degrees
    flatten_tolerance: float = DEFAULT_FLATTEN_TOL  # px

    def __post_init__(self):
        if self.colors_per_segment < 1:
            raise ValueError("colors_per_segment must be >= 1")
        for name in ("fit_tolerance", "corner_angle_threshold", "flatten_tolerance"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class VectorRegion:
    """A closed, filled vector path traced from one raster layer.

    `path` is the outer loop; `holes` hold the loops of enclosed empty
    areas, each itself closed. `area` is the enclosed pixel area (outer
    minus holes) and `centroid` the outer loop's area centroid.
    """

    path: list[CurveSegment]
    fill: tuple[int, int, int]
    centroid: tuple[float, float]
    source_segment_id: int
    holes: list[list[CurveSegment]] = field(default_factory=list)
    area: float = 0.0
    id: int | None = None

    def loops(self) -> list[list[CurveSegment]]:
        return [self.path] + list(self.holes)

    def validate(self, tol: float = 1e-6) -> None:
        if not self.path:
            raise ValueError("region has no outer path")
        for loop in self.loops():
            for seg in loop:
                want = _curves.CONTROL_POINT_COUNTS[seg.kind]
                if len(seg.control_points) != want:
                    raise ValueError("control-point count violates the curve taxonomy")
            for a, b in zip(loop, loop[1:]):
                if np.max(np.abs(a.end - b.start)) > tol:
                    raise ValueError("path is not continuous")
            if np.max(np.abs(loop[-1].end - loop[0].start)) > tol:
                raise ValueError("path is not closed")
        if not all(0 <= c <= 255 for c in self.fill):
            raise ValueError("fill channels must be in [0, 255]")


def quantize_segment_colors(segment: SegmentMask, image: np.ndarray,
                            k: int) -> list[tuple[np.ndarray, tuple[int, int, int]]]:
    """Split a segment into at most k flat color layers.

    Exact-color partition when the segment holds at most k distinct
    colors; otherwise a deterministic median-cut over the color
    distribution. Every layer color is the mean RGB of its own pixels,
    rounded half-up. Layers are ordered by pixel count (descending), then
    color.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    image = np.asarray(image)
    mask = segment.mask
    pixels = image[mask].astype(np.int64)
    k = min(k, len(pixels))
    uniq, inverse, counts = np.unique(pixels, axis=0,
                                      return_inverse=True, return_counts=True)
    if len(uniq) <= k:
        boxes = [[i] for i in range(len(uniq))]
    else:
        boxes = _median_cut(uniq, counts, k)
    ys, xs = np.nonzero(mask)
    layers = []
    for box in boxes:
        sel = np.isin(inverse, box)
        n = int(counts[box].sum())
        total = np.sum(uniq[box] * counts[box][:, None], axis=0)
        color = tuple(int(np.floor(c / n + 0.5)) for c in total)
        layer = np.zeros(mask.shape, dtype=bool)
        layer[ys[sel], xs[sel]] = True
        layers.append((n, color, layer))
    layers.sort(key=lambda t: (-t[0], t[1]))
    return [(layer, color) for _, color, layer in layers]


def _median_cut(uniq: np.ndarray, counts: np.ndarray, k: int) -> list[list[int]]:
    boxes: list[np.ndarray] = [np.arange(len(uniq))]
    while len(boxes) < k:
        spans = []
        for bi, box in enumerate(boxes):
            if len(box) < 2:
                spans.append((-1, 0, bi))
                continue
            rng = uniq[box].max(axis=0) - uniq[box].min(axis=0)
            spans.append((int(rng.max()), int(counts[box].sum()), bi))
        span, _, bi = max(spans, key=lambda t: (t[0], t[1], -t[2]))
        if span <= 0:
            break
        box = boxes.pop(bi)
        channel_ranges = uniq[box].max(axis=0) - uniq[box].min(axis=0)
        ch = int(np.argmax(channel_ranges))
        order = box[np.lexsort((uniq[box, 2], uniq[box, 1], uniq[box, 0], uniq[box, ch]))]
        cum = np.cumsum(counts[order])
        half = cum[-1] / 2.0
        split = int(np.searchsorted(cum, half)) + 1
        split = min(max(split, 1), len(order) - 1)
        boxes.insert(bi, order[split:])
        boxes.insert(bi, order[:split])
    return [list(b) for b in boxes]


def fit_curves(polyline: np.ndarray, cfg: TraceConfig) -> list[CurveSegment]:
    """Fit one closed polyline; see `curves.fit_closed_polyline`."""
    pts = np.asarray(polyline, dtype=np.float64)
    if len(pts) < 3:
        raise ValueError("polyline needs at least 3 vertices")
    if polygon_area(pts) < 1e-12:
        raise ValueError("degenerate contour")
    return fit_closed_polyline(pts, cfg.fit_tolerance, cfg.corner_angle_threshold)


def flatten_loop(loop: list[CurveSegment], tol: float) -> np.ndarray:
    """Flatten a closed loop of curves to a polygon, preserving order."""
    pieces = []
    for seg in loop:
        pts = flatten_curve(seg, tol)
        pieces.append(pts[:-1])  # endpoint repeats as the next start
    return np.vstack(pieces)


def flatten_to_polygon(region: VectorRegion, tol: float = DEFAULT_FLATTEN_TOL) -> np.ndarray:
    """Flatten the region's outer path into a simple polygon."""
    return flatten_loop(region.path, tol)


def vectorize_segment(segment: SegmentMask, image: np.ndarray,
                      cfg: TraceConfig) -> list[VectorRegion]:
    """Quantize, trace, and fit one segment into vector regions.

    Regions come back ordered by enclosed area (descending, ties by
    centroid raster order); hole loops are attached to the smallest outer
    loop that contains them.
    """
    regions: list[VectorRegion] = []
    for layer, color in quantize_segment_colors(segment, image, cfg.colors_per_segment):
        loops = trace_contours(layer)
        outers = [(lp, signed_area(lp)) for lp in loops if signed_area(lp) > 0]
        holes = [(lp, -signed_area(lp)) for lp in loops if signed_area(lp) < 0]
        # each hole belongs to the smallest outer loop containing it
        assigned: dict[int, list[np.ndarray]] = {i: [] for i in range(len(outers))}
        for hole, _ in holes:
            candidates = [(area, i) for i, (outer, area) in enumerate(outers)
                          if point_in_polygon(hole[0] + 1e-9, outer)]
            if candidates:
                assigned[min(candidates)[1]].append(hole)
        for i, (outer, outer_area) in enumerate(outers):
            hole_loops = assigned[i]
            area = outer_area - sum(polygon_area(h) for h in hole_loops)
            region = VectorRegion(
                path=fit_curves(outer, cfg),
                holes=[fit_curves(h, cfg) for h in hole_loops],
                fill=color,
                centroid=polygon_centroid(outer),
                source_segment_id=segment.id,
                area=float(area),
            )
            regions.append(region)
    regions.sort(key=lambda r: (-r.area, r.centroid[1], r.centroid[0]))
    return regions


def fill_loops(loops: list[np.ndarray], width: int, height: int) -> np.ndarray:
    """Even-odd scanline fill of flattened loops onto a pixel grid.

    A pixel is set when its center lies inside an odd number of loop
    boundaries.
    """
    mask = np.zeros((height, width), dtype=bool)
    edges = []
    for poly in loops:
        pts = np.asarray(poly, dtype=np.float64)
        nxt = np.roll(pts, -1, axis=0)
        keep = pts[:, 1] != nxt[:, 1]  # horizontal edges never cross a scanline
        edges.append(np.column_stack([pts[keep], nxt[keep]]))
    if not edges:
        return mask
    e = np.vstack(edges)
    if len(e) == 0:
        return mask
    x0, y0, x1, y1 = e[:, 0], e[:, 1], e[:, 2], e[:, 3]
    ymin = np.minimum(y0, y1)
    ymax = np.maximum(y0, y1)
    for row in range(height):
        yc = row + 0.5
        hit = (ymin <= yc) & (yc < ymax)
        if not hit.any():
            continue
        xs = x0[hit] + (yc - y0[hit]) * (x1[hit] - x0[hit]) / (y1[hit] - y0[hit])
        xs.sort()
        for a, b in zip(xs[0::2], xs[1::2]):
            lo = max(0, int(np.ceil(a - 0.5)))
            hi = min(width, int(np.ceil(b - 0.5)))
            if hi > lo:
                mask[row, lo:hi] = True
    return mask


def rasterize_region(region: VectorRegion, width: int, height: int,
                     tol: float = DEFAULT_FLATTEN_TOL) -> np.ndarray:
    """Binary coverage mask of a region (outer minus holes, even-odd)."""
    loops = [flatten_loop(loop, tol) for loop in region.loops()]
    return fill_loops(loops, width, height)
