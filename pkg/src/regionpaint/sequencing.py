"""Paint-order construction for vector regions.

Regions are grouped per segment by proximity (agglomerative clustering on
centroids) and ordered by open-path tours: one tour over group centroids,
one tour inside each group. Segments never interleave; their order is the
segment paint order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage

from .geometry import polygon_centroid
from .vectorization import VectorRegion

_LINKAGES = ("single", "complete", "average")
# beyond this many points the pairwise matrix is skipped and the tour
# stays at its nearest-neighbor construction
_TWO_OPT_LIMIT = 1500


@dataclass
class SequencingConfig:
    linkage: str = "average"
    cluster_distance_cutoff: float | None = None  # None -> 15% of image diagonal
    tsp_two_opt_max_passes: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.linkage not in _LINKAGES:
            raise ValueError(f"linkage must be one of {_LINKAGES}")
        if self.cluster_distance_cutoff is not None and self.cluster_distance_cutoff <= 0:
            raise ValueError("cluster_distance_cutoff must be positive")
        if self.tsp_two_opt_max_passes < 0:
            raise ValueError("tsp_two_opt_max_passes must be >= 0")

    def resolved_cutoff(self, image_size: tuple[int, int] | None) -> float:
        if self.cluster_distance_cutoff is not None:
            return self.cluster_distance_cutoff
        if image_size is None:
            raise ValueError("cluster cutoff needs an image size to derive its default")
        w, h = image_size
        return 0.15 * float(np.hypot(w, h))


@dataclass
class RegionGroup:
    member_ids: list[int]
    centroid: tuple[float, float]


@dataclass
class SequencedRegion:
    region: VectorRegion
    segment_id: int
    group_id: int
    rank: int


def centroid(polygon) -> tuple[float, float]:
    """Area-weighted polygon centroid (shoelace moments)."""
    return polygon_centroid(polygon)


def cluster_regions(regions: list[VectorRegion], cfg: SequencingConfig,
                    image_size: tuple[int, int] | None = None) -> list[RegionGroup]:
    """Group one segment's regions by centroid proximity.

    Agglomerative clustering cut at the configured distance; group
    centroids are area-weighted so large regions anchor their group.
    Group order follows each group's first member.
    """
    if not regions:
        raise ValueError("cannot cluster an empty region list")
    pts = np.array([r.centroid for r in regions], dtype=np.float64)
    if len(regions) == 1:
        labels = np.array([1])
    else:
        cutoff = cfg.resolved_cutoff(image_size)
        z = linkage(pts, method=cfg.linkage)
        labels = fcluster(z, t=cutoff, criterion="distance")
    groups: dict[int, list[int]] = {}
    for i, lab in enumerate(labels):
        groups.setdefault(int(lab), []).append(i)
    out = []
    for members in sorted(groups.values(), key=lambda m: m[0]):
        w = np.array([max(regions[i].area, 1e-9) for i in members])
        c = np.sum(pts[members] * w[:, None], axis=0) / np.sum(w)
        out.append(RegionGroup(member_ids=members, centroid=(float(c[0]), float(c[1]))))
    return out


def tour_length(points: np.ndarray, order) -> float:
    pts = np.asarray(points, dtype=np.float64)
    o = np.asarray(order)
    if len(o) < 2:
        return 0.0
    d = np.diff(pts[o], axis=0)
    return float(np.sum(np.hypot(d[:, 0], d[:, 1])))


def nearest_neighbor_tour(points: np.ndarray) -> list[int]:
    """Greedy open path starting nearest the canvas top-left corner."""
    pts = np.asarray(points, dtype=np.float64)
    n = len(pts)
    if n == 0:
        return []
    start = int(np.lexsort((np.arange(n), np.hypot(pts[:, 0], pts[:, 1])))[0])
    todo = np.ones(n, dtype=bool)
    todo[start] = False
    tour = [start]
    cur = start
    for _ in range(n - 1):
        d = np.hypot(pts[:, 0] - pts[cur, 0], pts[:, 1] - pts[cur, 1])
        d[~todo] = np.inf
        cur = int(np.argmin(d))  # ties resolve to the lowest index
        todo[cur] = False
        tour.append(cur)
    return tour


def two_opt(points: np.ndarray, tour: list[int], max_passes: int) -> list[int]:
    """First-improvement 2-opt on an open path (no return leg)."""
    pts = np.asarray(points, dtype=np.float64)
    n = len(tour)
    if n < 3 or max_passes == 0:
        return list(tour)
    if n > _TWO_OPT_LIMIT:
        return list(tour)
    dist = np.hypot(pts[:, None, 0] - pts[None, :, 0], pts[:, None, 1] - pts[None, :, 1])
    t = list(tour)
    for _ in range(max_passes):
        improved = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                if i == 0 and j == n - 1:
                    continue  # full reversal changes nothing on an open path
                delta = 0.0
                if i > 0:
                    delta += dist[t[i - 1], t[j]] - dist[t[i - 1], t[i]]
                if j < n - 1:
                    delta += dist[t[i], t[j + 1]] - dist[t[j], t[j + 1]]
                if delta < -1e-12:
                    t[i:j + 1] = reversed(t[i:j + 1])
                    improved = True
        if not improved:
            break
    return t


def solve_tsp(points, cfg: SequencingConfig) -> list[int]:
    """Open painting tour: nearest-neighbor start plus 2-opt refinement."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or len(pts) == 0:
        raise ValueError("solve_tsp needs at least one point")
    tour = nearest_neighbor_tour(pts)
    return two_opt(pts, tour, cfg.tsp_two_opt_max_passes)


def sequence_regions(regions: list[VectorRegion], cfg: SequencingConfig,
                     image_size: tuple[int, int] | None = None,
                     segment_order: list[int] | None = None) -> list[SequencedRegion]:
    """Flatten regions into the global paint sequence.

    Outer order follows `segment_order` (defaults to ascending segment id,
    which the pipeline assigns in paint order); within a segment, groups
    are visited in tour order over group centroids and regions in tour
    order within each group. Ranks are global and strictly increasing.
    """
    by_segment: dict[int, list[VectorRegion]] = {}
    for r in regions:
        by_segment.setdefault(r.source_segment_id, []).append(r)
    if segment_order is None:
        segment_order = sorted(by_segment)
    out: list[SequencedRegion] = []
    rank = 0
    group_counter = 0
    for seg_id in segment_order:
        members = by_segment.get(seg_id)
        if not members:
            continue
        groups = cluster_regions(members, cfg, image_size)
        group_order = solve_tsp([g.centroid for g in groups], cfg)
        for gi in group_order:
            group = groups[gi]
            pts = [members[i].centroid for i in group.member_ids]
            for k in solve_tsp(pts, cfg):
                out.append(SequencedRegion(
                    region=members[group.member_ids[k]],
                    segment_id=seg_id,
                    group_id=group_counter,
                    rank=rank,
                ))
                rank += 1
            group_counter += 1
    return out
