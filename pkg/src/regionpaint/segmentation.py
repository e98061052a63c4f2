"""Decompose an image into non-overlapping segments.

Two entry paths produce raw segment masks: a built-in unsupervised
segmenter (greedy graph merging over an 8-connected pixel grid with
color-distance edge weights) and ingestion of an externally produced
label map. Both feed the same overlap-resolution and ordering passes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from PIL import Image

# Merge threshold for the graph segmenter at granularity 1; the effective
# threshold is _MERGE_SCALE / granularity, so higher granularity splits finer.
_MERGE_SCALE = 512.0


class LabelMapError(ValueError):
    """Raised for malformed or mismatched label-map inputs."""


class LabelMapWarning(UserWarning):
    """Non-fatal label-map issues (e.g. non-contiguous labels)."""


@dataclass
class SegmentMask:
    """One scene segment: a binary mask over the full image grid."""

    id: int
    mask: np.ndarray            # bool, (H, W)
    area: int
    bbox: tuple[int, int, int, int]  # x, y, w, h of set pixels
    background: bool = False

    @classmethod
    def from_mask(cls, seg_id: int, mask: np.ndarray, background: bool = False) -> "SegmentMask":
        mask = np.asarray(mask, dtype=bool)
        ys, xs = np.nonzero(mask)
        if ys.size == 0:
            raise ValueError("segment mask must contain at least one pixel")
        x0, x1 = int(xs.min()), int(xs.max())
        y0, y1 = int(ys.min()), int(ys.max())
        return cls(id=seg_id, mask=mask, area=int(ys.size),
                   bbox=(x0, y0, x1 - x0 + 1, y1 - y0 + 1), background=background)

    @property
    def shape(self) -> tuple[int, int]:
        return self.mask.shape


@dataclass
class SegmentationConfig:
    method: str = "builtin"            # "builtin" | "label-map"
    granularity: int = 4               # higher -> finer built-in segments
    iou_threshold: float = 0.7
    min_segment_area: int | None = None  # None -> 0.05% of image pixels
    seed: int = 0

    def __post_init__(self):
        if self.method not in ("builtin", "label-map"):
            raise ValueError(f"unknown segmentation method {self.method!r}")
        if self.granularity < 1:
            raise ValueError("granularity must be >= 1")
        if not 0.0 <= self.iou_threshold <= 1.0:
            raise ValueError("iou_threshold must be in [0, 1]")

    def resolved_min_area(self, width: int, height: int) -> int:
        if self.min_segment_area is not None:
            return max(1, int(self.min_segment_area))
        return max(1, (width * height) // 2000)


def _color_graph_labels(image: np.ndarray, merge_k: float) -> np.ndarray:
    """Greedy region merging on the 8-connected pixel graph.

    Edges are processed in ascending color-distance order; two components
    merge while the edge weight stays below each component's internal
    variation plus merge_k / component_size. Flat-color areas always merge
    (zero-weight edges), so exact-color images partition exactly.
    """
    h, w = image.shape[:2]
    n = h * w
    px = image.reshape(n, 3).astype(np.float64)
    idx = np.arange(n, dtype=np.int64).reshape(h, w)

    pairs = []
    for dy, dx in ((0, 1), (1, 0), (1, 1), (1, -1)):
        ys = slice(0, h - dy)
        xs = slice(max(0, -dx), w - max(0, dx))
        a = idx[ys, xs].ravel()
        b = idx[dy:h, max(0, dx):w + min(0, dx)].ravel()
        pairs.append((a, b))
    a = np.concatenate([p[0] for p in pairs])
    b = np.concatenate([p[1] for p in pairs])
    wgt = np.sqrt(np.sum((px[a] - px[b]) ** 2, axis=1))
    order = np.lexsort((b, a, wgt))  # deterministic tie-breaking

    parent = np.arange(n, dtype=np.int64)
    size = np.ones(n, dtype=np.int64)
    internal = np.zeros(n, dtype=np.float64)

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for e in order:
        u, v, wt = find(int(a[e])), find(int(b[e])), wgt[e]
        if u == v:
            continue
        if wt <= min(internal[u] + merge_k / size[u],
                     internal[v] + merge_k / size[v]):
            if size[u] < size[v] or (size[u] == size[v] and v < u):
                u, v = v, u
            parent[v] = u
            size[u] += size[v]
            internal[u] = wt  # edges ascend, so this is the component max

    roots = np.fromiter((find(i) for i in range(n)), dtype=np.int64, count=n)
    _, labels = np.unique(roots, return_inverse=True)
    return labels.reshape(h, w)


def _absorb_small_labels(labels: np.ndarray, min_area: int) -> np.ndarray:
    """Merge components smaller than min_area into their largest neighbor.

    Smallest components go first (ties by label); adjacency is 8-connected
    and maintained incrementally through a union-find over labels.
    """
    areas = np.bincount(labels.ravel()).astype(np.int64)
    nlab = len(areas)
    if nlab <= 1:
        return labels
    adj: list[set[int]] = [set() for _ in range(nlab)]
    h, w = labels.shape
    for dy, dx in ((0, 1), (1, 0), (1, 1), (1, -1)):
        la = labels[: h - dy, max(0, -dx): w - max(0, dx)]
        lb = labels[dy:, max(0, dx): w + min(0, dx)]
        diff = la != lb
        if not diff.any():
            continue
        pairs = np.unique(np.stack([la[diff], lb[diff]], axis=1), axis=0)
        for u, v in pairs:
            adj[int(u)].add(int(v))
            adj[int(v)].add(int(u))

    parent = list(range(nlab))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    while True:
        roots = {find(i) for i in range(nlab)}
        if len(roots) <= 1:
            break
        small = sorted((r for r in roots if areas[r] < min_area),
                       key=lambda r: (areas[r], r))
        if not small:
            break
        s = small[0]
        options = {find(v) for v in adj[s]} - {s}
        if not options:
            break
        target = max(options, key=lambda r: (areas[r], -r))
        parent[s] = target
        areas[target] += areas[s]
        adj[target] |= adj[s]
    lut = np.fromiter((find(i) for i in range(nlab)), dtype=np.int64, count=nlab)
    return lut[labels]


def _masks_from_labels(labels: np.ndarray, ordered_values=None) -> list[SegmentMask]:
    """One SegmentMask per label value, ids assigned in the given order.

    Default order is first-appearance in raster scan, which is stable for
    a fixed input.
    """
    if ordered_values is None:
        flat = labels.ravel()
        _, first = np.unique(flat, return_index=True)
        values = [int(flat[i]) for i in np.sort(first)]
    else:
        values = list(ordered_values)
    return [SegmentMask.from_mask(i, labels == v) for i, v in enumerate(values)]


def segment_image(image: np.ndarray, cfg: SegmentationConfig) -> list[SegmentMask]:
    """Built-in unsupervised segmentation into raw (non-overlapping) masks.

    Deterministic for a fixed (image, config): no RNG is involved, the
    seed is carried only for config compatibility.
    """
    if cfg.method != "builtin":
        raise ValueError("segment_image requires cfg.method == 'builtin'")
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError("expected an (H, W, 3) RGB image")
    h, w = image.shape[:2]
    if h * w == 1:
        return [SegmentMask.from_mask(0, np.ones((h, w), dtype=bool))]
    labels = _color_graph_labels(image, _MERGE_SCALE / cfg.granularity)
    labels = _absorb_small_labels(labels, cfg.resolved_min_area(w, h))
    return _masks_from_labels(labels)


# ---------------------------------------------------------------------------
# Label-map ingestion / export
# ---------------------------------------------------------------------------

def read_label_map(path) -> np.ndarray:
    """Read a single-channel 16-bit label raster into an int array."""
    with Image.open(path) as im:
        if im.mode not in ("I", "I;16", "L", "P"):
            raise LabelMapError(f"label map must be single-channel, got mode {im.mode!r}")
        arr = np.asarray(im)
    return arr.astype(np.int64)


def write_label_map(labels: np.ndarray, path) -> None:
    labels = np.asarray(labels)
    if labels.min() < 0 or labels.max() > 0xFFFF:
        raise LabelMapError("labels must fit in uint16")
    Image.fromarray(labels.astype(np.uint16)).save(path)


def ingest_label_map(source, image_size: tuple[int, int]) -> list[SegmentMask]:
    """Build raw segments from a label raster (path or array).

    `image_size` is (width, height) of the image the map must match.
    Value 0 means unlabeled; every distinct nonzero value becomes one
    mask. Unlabeled pixels are left for the residual background sweep.
    """
    labels = source if isinstance(source, np.ndarray) else read_label_map(source)
    labels = np.asarray(labels)
    w, h = image_size
    if labels.shape != (h, w):
        raise LabelMapError(
            f"label map is {labels.shape[1]}x{labels.shape[0]} but the image is {w}x{h}")
    if labels.min() < 0:
        raise LabelMapError("labels must be non-negative integers")
    values = np.unique(labels)
    values = values[values > 0]
    if values.size == 0:
        raise LabelMapError("no segments: label map contains no nonzero labels")
    expected = np.arange(1, values.size + 1)
    if not np.array_equal(values, expected):
        warnings.warn(
            f"label values are not contiguous 1..{values.size}", LabelMapWarning, stacklevel=2)
    return _masks_from_labels(labels, ordered_values=[int(v) for v in values])


def export_label_map(masks: list[SegmentMask], path=None) -> np.ndarray:
    """Encode non-overlapping masks as a label raster (list index + 1).

    Later list entries overwrite earlier ones where masks overlap, which
    only matters for raw (unresolved) inputs.
    """
    if not masks:
        raise ValueError("cannot export an empty segment list")
    if len(masks) > 0xFFFF:
        raise LabelMapError("too many segments for a 16-bit label map")
    labels = np.zeros(masks[0].shape, dtype=np.uint16)
    for i, m in enumerate(masks):
        labels[m.mask] = i + 1
    if path is not None:
        write_label_map(labels, path)
    return labels


# ---------------------------------------------------------------------------
# Overlap resolution and ordering
# ---------------------------------------------------------------------------

def compute_iou(a: SegmentMask, b: SegmentMask) -> float:
    """Intersection over union of two masks sharing one image grid."""
    if a.shape != b.shape:
        raise ValueError(f"mask dimensions differ: {a.shape} vs {b.shape}")
    inter = int(np.count_nonzero(a.mask & b.mask))
    if inter == 0:
        return 0.0
    union = a.area + b.area - inter
    return inter / union


def resolve_overlaps(masks: list[SegmentMask], cfg: SegmentationConfig) -> list[SegmentMask]:
    """Make masks pairwise disjoint.

    Masks are processed in ascending original-area order. For each
    processed/kept pair that still overlaps: IoU above the threshold drops
    the smaller (earlier) mask outright; otherwise the larger (current)
    mask loses the shared pixels and the smaller keeps them. The IoU test
    uses the current state of both masks at comparison time. Masks emptied
    by subtraction are dropped.
    """
    if not masks:
        return []
    shape = masks[0].shape
    for m in masks:
        if m.shape != shape:
            raise ValueError("all masks must share the image dimensions")
    order = sorted(masks, key=lambda m: (m.area, m.bbox[1], m.bbox[0], m.id))
    kept: list[SegmentMask | None] = []
    for m in order:
        cur = m.mask.copy()
        cur_count = int(np.count_nonzero(cur))
        for i, prev in enumerate(kept):
            if prev is None:
                continue
            inter = int(np.count_nonzero(cur & prev.mask))
            if inter == 0:
                continue
            iou = inter / (cur_count + prev.area - inter)
            if iou > cfg.iou_threshold:
                kept[i] = None  # near-duplicate: smaller, earlier mask loses
            else:
                cur &= ~prev.mask
                cur_count = int(np.count_nonzero(cur))
                if cur_count == 0:
                    break
        if cur_count > 0:
            kept.append(SegmentMask.from_mask(m.id, cur, background=m.background))
    return [k for k in kept if k is not None]


def order_segments(masks: list[SegmentMask]) -> list[SegmentMask]:
    """Paint order: area descending, ties by bbox (top, left), then id."""
    return sorted(masks, key=lambda m: (-m.area, m.bbox[1], m.bbox[0], m.id))


def add_background_segment(masks: list[SegmentMask],
                           image_size: tuple[int, int]) -> list[SegmentMask]:
    """Prepend a residual background segment covering unassigned pixels.

    Returns the input unchanged when the masks already cover the image.
    The background is painted first regardless of its area.
    """
    w, h = image_size
    covered = np.zeros((h, w), dtype=bool)
    for m in masks:
        covered |= m.mask
    residual = ~covered
    if not residual.any():
        return list(masks)
    bg = SegmentMask.from_mask(-1, residual, background=True)
    return [bg] + list(masks)


def reindex_segments(masks: list[SegmentMask]) -> list[SegmentMask]:
    """Assign ids 0..n-1 in list (paint) order."""
    return [replace(m, id=i) for i, m in enumerate(masks)]
