"""Stroke-by-stroke canvas rendering.

Each stroke builds a patch: a base raster (the region pixels claimed by
the stroke's rectangle, in the region fill) and an overlay raster (the
brush template scaled, tinted, and rotated per the stroke parameters).
The two blend by the multiplicative rule below and composite onto the
canvas in sequence order, from which frames and the final image fall out.

Blending rule (per channel, values in [0, 1]):

    C_result = (C_base * C_overlay) * (1 - A_overlay) + C_base * A_overlay
    A_result = A_base * (1 - A_overlay) + A_overlay

`blend_mode="source_over"` swaps in standard straight-alpha source-over
compositing of the overlay onto the base instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .brush import BrushTemplate
from .strokes import StrokeParams

BLEND_MODES = ("multiply", "source_over")


@dataclass
class Canvas:
    rgb: np.ndarray       # (H, W, 3) float64
    alpha: np.ndarray     # (H, W) float64
    coverage: np.ndarray  # (H, W) bool: pixels any stroke has touched
    t: int = 0

    @classmethod
    def blank(cls, width: int, height: int) -> "Canvas":
        """Fresh opaque white canvas."""
        return cls(rgb=np.ones((height, width, 3), dtype=np.float64),
                   alpha=np.ones((height, width), dtype=np.float64),
                   coverage=np.zeros((height, width), dtype=bool))

    @property
    def size(self) -> tuple[int, int]:
        h, w = self.alpha.shape
        return w, h

    def to_uint8(self) -> np.ndarray:
        return np.clip(np.floor(self.rgb * 255.0 + 0.5), 0, 255).astype(np.uint8)


@dataclass
class StrokePatch:
    base: np.ndarray     # (h, w, 4) float64 RGBA
    overlay: np.ndarray  # (h, w, 4) float64 RGBA
    origin: tuple[int, int]  # top-left canvas placement (x, y)

    def __post_init__(self):
        if self.base.shape != self.overlay.shape:
            raise ValueError("base and overlay must share dimensions")


def _bilinear(channel: np.ndarray, xs: np.ndarray, ys: np.ndarray,
              clamp: bool) -> np.ndarray:
    """Bilinear sample at float coords; outside reads 0 unless clamped."""
    h, w = channel.shape
    x0 = np.floor(xs).astype(np.int64)
    y0 = np.floor(ys).astype(np.int64)
    fx = xs - x0
    fy = ys - y0
    out = np.zeros(xs.shape, dtype=np.float64)
    for dy in (0, 1):
        for dx in (0, 1):
            gx = x0 + dx
            gy = y0 + dy
            weight = (fx if dx else 1 - fx) * (fy if dy else 1 - fy)
            if clamp:
                val = channel[np.clip(gy, 0, h - 1), np.clip(gx, 0, w - 1)]
            else:
                inside = (gx >= 0) & (gx < w) & (gy >= 0) & (gy < h)
                val = np.where(inside, channel[np.clip(gy, 0, h - 1),
                                               np.clip(gx, 0, w - 1)], 0.0)
            out += weight * val
    return out


def transform_brush(template: BrushTemplate, stroke: StrokeParams) -> np.ndarray | None:
    """Scale, tint, and rotate the template for one stroke.

    One inverse-affine bilinear pass maps template space onto an expanded
    output raster: the footprint ends exactly at the stroke rectangle's
    (float) edges, positive angles turn +x toward +y (y grows downward),
    and pixels outside the rotated footprint get alpha 0. Returns None
    when either stroke dimension is below one pixel (the caller records
    a skip).
    """
    if stroke.w < 1.0 or stroke.h < 1.0:
        return None
    rad = math.radians(stroke.theta)
    c, s = math.cos(rad), math.sin(rad)
    # sample on the canvas pixel grid so the raster covers exactly the
    # pixel centers the rotated rectangle can reach; this keeps the
    # footprint aligned even for strokes only a pixel or two wide
    ox, oy, out_w, out_h = _patch_window(stroke)
    dx = ox + np.arange(out_w) + 0.5 - stroke.x
    dy = oy + np.arange(out_h) + 0.5 - stroke.y
    gx, gy = np.meshgrid(dx, dy)
    u = gx * c + gy * s       # along the long axis
    v = -gx * s + gy * c
    th, tw = template.alpha.shape
    tx = (u / stroke.w + 0.5) * tw - 0.5
    ty = (v / stroke.h + 0.5) * th - 0.5
    tint = np.array([stroke.r, stroke.g, stroke.b], dtype=np.float64) / 255.0
    out = np.empty((out_h, out_w, 4), dtype=np.float64)
    for ch in range(3):
        out[:, :, ch] = _bilinear(template.rgb[:, :, ch], tx, ty, clamp=True) * tint[ch]
    out[:, :, 3] = _bilinear(template.alpha, tx, ty, clamp=False)
    np.clip(out, 0.0, 1.0, out=out)
    return out


def make_base(mask: np.ndarray, fill: tuple[int, int, int]) -> np.ndarray:
    """RGBA raster: the fill color inside the mask, transparent outside."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("base mask is empty")
    h, w = mask.shape
    out = np.zeros((h, w, 4), dtype=np.float64)
    color = np.array(fill, dtype=np.float64) / 255.0
    out[:, :, :3] = color * mask[:, :, None]
    out[:, :, 3] = mask.astype(np.float64)
    return out


def blend(base: np.ndarray, overlay: np.ndarray) -> np.ndarray:
    """Multiplicative base/overlay blend (see module docstring)."""
    if base.shape != overlay.shape:
        raise ValueError(f"dimension mismatch: {base.shape} vs {overlay.shape}")
    cb, ab = base[..., :3], base[..., 3:]
    co, ao = overlay[..., :3], overlay[..., 3:]
    out = np.empty_like(base)
    out[..., :3] = (cb * co) * (1.0 - ao) + cb * ao
    out[..., 3:] = ab * (1.0 - ao) + ao
    return out


def blend_source_over(base: np.ndarray, overlay: np.ndarray) -> np.ndarray:
    """Standard straight-alpha source-over of overlay onto base."""
    if base.shape != overlay.shape:
        raise ValueError(f"dimension mismatch: {base.shape} vs {overlay.shape}")
    cb, ab = base[..., :3], base[..., 3:]
    co, ao = overlay[..., :3], overlay[..., 3:]
    a_out = ao + ab * (1.0 - ao)
    safe = np.where(a_out > 0, a_out, 1.0)
    out = np.empty_like(base)
    out[..., :3] = (co * ao + cb * ab * (1.0 - ao)) / safe
    out[..., 3:] = a_out
    return out


def apply_stroke(canvas: Canvas, patch: StrokePatch,
                 blend_mode: str = "multiply") -> Canvas:
    """Blend the patch and composite it onto the canvas at patch.origin.

    Pixels outside the patch rectangle never change. A patch fully
    outside the canvas is a no-op (no step increment).
    """
    if blend_mode not in BLEND_MODES:
        raise ValueError(f"unknown blend mode {blend_mode!r}")
    mixed = (blend if blend_mode == "multiply" else blend_source_over)(
        patch.base, patch.overlay)
    ph, pw = mixed.shape[:2]
    ox, oy = patch.origin
    cw, ch = canvas.size
    x0, y0 = max(0, ox), max(0, oy)
    x1, y1 = min(cw, ox + pw), min(ch, oy + ph)
    if x0 >= x1 or y0 >= y1:
        return canvas
    src = mixed[y0 - oy:y1 - oy, x0 - ox:x1 - ox]
    cs, as_ = src[..., :3], src[..., 3:]
    window_rgb = canvas.rgb[y0:y1, x0:x1]
    window_a = canvas.alpha[y0:y1, x0:x1, None]
    a_out = as_ + window_a * (1.0 - as_)
    safe = np.where(a_out > 0, a_out, 1.0)
    canvas.rgb[y0:y1, x0:x1] = (cs * as_ + window_rgb * window_a * (1.0 - as_)) / safe
    canvas.alpha[y0:y1, x0:x1] = a_out[..., 0]
    canvas.coverage[y0:y1, x0:x1] |= as_[..., 0] > 0
    canvas.t += 1
    return canvas


def _patch_window(stroke: StrokeParams) -> tuple[int, int, int, int]:
    """Canvas-grid window (ox, oy, w, h) spanned by the rotated rectangle.

    Covers every pixel whose center can lie inside the rectangle
    (boundary-inclusive with a small tolerance).
    """
    rad = math.radians(stroke.theta)
    c, s = math.cos(rad), math.sin(rad)
    half_w = (abs(stroke.w * c) + abs(stroke.h * s)) / 2.0
    half_h = (abs(stroke.w * s) + abs(stroke.h * c)) / 2.0
    ox = int(math.ceil(stroke.x - half_w - 0.5 - 1e-9))
    oy = int(math.ceil(stroke.y - half_h - 0.5 - 1e-9))
    x_end = int(math.floor(stroke.x + half_w - 0.5 + 1e-9))
    y_end = int(math.floor(stroke.y + half_h - 0.5 + 1e-9))
    return ox, oy, max(1, x_end - ox + 1), max(1, y_end - oy + 1)


def stroke_patch_window(stroke: StrokeParams, overlay_shape: tuple[int, int] | None = None) -> tuple[int, int]:
    """Top-left canvas placement of a stroke's patch raster."""
    ox, oy, _, _ = _patch_window(stroke)
    return ox, oy


def rect_coverage_mask(stroke: StrokeParams, origin: tuple[int, int],
                       shape: tuple[int, int]) -> np.ndarray:
    """Pixel centers of a patch window that fall inside the stroke rect."""
    ph, pw = shape
    ox, oy = origin
    xs = ox + np.arange(pw) + 0.5 - stroke.x
    ys = oy + np.arange(ph) + 0.5 - stroke.y
    gx, gy = np.meshgrid(xs, ys)
    rad = math.radians(stroke.theta)
    c, s = math.cos(rad), math.sin(rad)
    u = gx * c + gy * s
    v = -gx * s + gy * c
    return (np.abs(u) <= stroke.w / 2.0 + 1e-9) & (np.abs(v) <= stroke.h / 2.0 + 1e-9)


def fidelity(rendered: np.ndarray, reference: np.ndarray) -> tuple[float, float]:
    """Mean squared error over RGB in [0, 1] and the matching PSNR in dB.

    Identical images report infinite PSNR.
    """
    a = np.asarray(rendered, dtype=np.float64)
    b = np.asarray(reference, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if a.max() > 1.0 or b.max() > 1.0:
        a, b = a / 255.0, b / 255.0
    mse = float(np.mean((a - b) ** 2))
    psnr = math.inf if mse == 0.0 else 10.0 * math.log10(1.0 / mse)
    return mse, psnr


@dataclass
class StrokeOutcome:
    rank: int
    applied_rect: tuple[int, int, int, int] | None  # x0, y0, x1, y1 on canvas
    skipped: bool = False


@dataclass
class RenderReport:
    strokes_applied: int = 0
    strokes_skipped: int = 0
    frames_emitted: int = 0
    outcomes: list[StrokeOutcome] = field(default_factory=list)
    coverage_counts: list[int] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def _frame_due(policy: str, stroke_index: int, total: int,
               boundaries: dict[str, bool]) -> bool:
    if policy == "none":
        return False
    if policy == "stroke":
        return True
    if policy.startswith("every:"):
        k = int(policy.split(":", 1)[1])
        return (stroke_index + 1) % max(1, k) == 0
    if policy in ("group", "region", "segment"):
        return boundaries[policy]
    raise ValueError(f"unknown frame policy {policy!r}")


def resolve_frame_policy(policy: str, total_strokes: int) -> str:
    """`auto` emits per stroke up to 2000 strokes, per group beyond."""
    if policy == "auto":
        return "stroke" if total_strokes <= 2000 else "group"
    return policy


def render_sequence(strokes, region_masks: dict[int, np.ndarray],
                    region_fills: dict[int, tuple[int, int, int]],
                    width: int, height: int, template: BrushTemplate,
                    blend_mode: str = "multiply",
                    frame_policy: str = "auto",
                    on_frame=None,
                    collect_frames: bool = False) -> tuple[list[np.ndarray], np.ndarray, RenderReport]:
    """Apply stroke records in order onto a blank canvas.

    `strokes` is an ordered iterable with .rank, .region_id, .segment_id,
    .group_id and .params (StrokeParams); region geometry arrives
    pre-rasterized in `region_masks`. Frames (uint8 RGB copies) go to
    `on_frame` and, when `collect_frames`, into the returned list; the
    final canvas is always returned.
    """
    strokes = list(strokes)
    policy = resolve_frame_policy(frame_policy, len(strokes))
    canvas = Canvas.blank(width, height)
    report = RenderReport()
    frames: list[np.ndarray] = []

    def emit() -> None:
        frame = canvas.to_uint8()
        if on_frame is not None:
            on_frame(report.frames_emitted, frame)
        if collect_frames:
            frames.append(frame)
        report.frames_emitted += 1

    for i, rec in enumerate(strokes):
        params = rec.params
        overlay = transform_brush(template, params)
        if overlay is None:
            report.strokes_skipped += 1
            report.warnings.append(
                f"stroke {rec.rank}: size {params.w:.2f}x{params.h:.2f} below 1 px, skipped")
            report.outcomes.append(StrokeOutcome(rec.rank, None, skipped=True))
            report.coverage_counts.append(int(canvas.coverage.sum()))
            continue
        origin = stroke_patch_window(params, overlay.shape[:2])
        region_mask = region_masks[rec.region_id]
        base_mask = _window_mask(region_mask, origin, overlay.shape[:2])
        base_mask &= rect_coverage_mask(params, origin, overlay.shape[:2])
        base = np.zeros_like(overlay)
        color = np.array(region_fills[rec.region_id], dtype=np.float64) / 255.0
        base[:, :, :3] = color * base_mask[:, :, None]
        base[:, :, 3] = base_mask
        patch = StrokePatch(base=base, overlay=overlay, origin=origin)
        t_before = canvas.t
        apply_stroke(canvas, patch, blend_mode)
        if canvas.t == t_before:
            report.strokes_skipped += 1
            report.warnings.append(f"stroke {rec.rank}: patch fully outside canvas, skipped")
            report.outcomes.append(StrokeOutcome(rec.rank, None, skipped=True))
        else:
            report.strokes_applied += 1
            ph, pw = overlay.shape[:2]
            rect = (max(0, origin[0]), max(0, origin[1]),
                    min(width, origin[0] + pw), min(height, origin[1] + ph))
            report.outcomes.append(StrokeOutcome(rec.rank, rect))
        report.coverage_counts.append(int(canvas.coverage.sum()))
        nxt = strokes[i + 1] if i + 1 < len(strokes) else None
        boundaries = {
            "group": nxt is None or nxt.group_id != rec.group_id,
            "region": nxt is None or nxt.region_id != rec.region_id,
            "segment": nxt is None or nxt.segment_id != rec.segment_id,
        }
        if _frame_due(policy, i, len(strokes), boundaries):
            emit()
    return frames, canvas.to_uint8(), report


def _window_mask(full_mask: np.ndarray, origin: tuple[int, int],
                 shape: tuple[int, int]) -> np.ndarray:
    """Crop a full-canvas mask to a patch window, zero-padded outside."""
    ph, pw = shape
    ox, oy = origin
    h, w = full_mask.shape
    out = np.zeros((ph, pw), dtype=bool)
    x0, y0 = max(0, ox), max(0, oy)
    x1, y1 = min(w, ox + pw), min(h, oy + ph)
    if x0 < x1 and y0 < y1:
        out[y0 - oy:y1 - oy, x0 - ox:x1 - ox] = full_mask[y0:y1, x0:x1]
    return out
