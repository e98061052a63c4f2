"""Brush templates: a procedural default and RGBA file loading.

Templates keep RGB and alpha separate as float arrays in [0, 1]. The
default brush has an elliptical soft-edged footprint in the alpha channel
and faint longitudinal streaks in the texture; the texture stays close to
white so multiplicative blending barely shifts the fill color.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image

_PROCEDURAL_SEED = 0x5EED

PROCEDURAL_REF = "procedural:v1"


@dataclass
class BrushTemplate:
    rgb: np.ndarray    # (H, W, 3) float64 in [0, 1]
    alpha: np.ndarray  # (H, W) float64 in [0, 1]
    ref: str = PROCEDURAL_REF

    def __post_init__(self):
        if self.alpha.max() <= 0:
            raise ValueError("brush footprint is empty")

    @property
    def size(self) -> tuple[int, int]:
        h, w = self.alpha.shape
        return w, h

    @property
    def aspect(self) -> float:
        w, h = self.size
        return w / h


def procedural_brush(width: int = 128, height: int = 64) -> BrushTemplate:
    """Deterministic default brush (fixed internal seed).

    The footprint is a soft-edged superellipse: rounded like a bristle
    dab but covering most of the stroke rectangle, so the multiplicative
    blend leaves only a thin under-covered rim per stroke.
    """
    rng = np.random.default_rng(_PROCEDURAL_SEED)
    ys = (np.arange(height) + 0.5 - height / 2.0) / (height / 2.0)
    xs = (np.arange(width) + 0.5 - width / 2.0) / (width / 2.0)
    u, v = np.meshgrid(xs, ys)
    r = (np.abs(u) ** 6 + np.abs(v) ** 6) ** (1.0 / 6.0)
    t = np.clip((1.0 - r) / 0.08, 0.0, 1.0)
    alpha = t * t * (3.0 - 2.0 * t)
    # longitudinal streaks: smoothed per-row noise, texture in [0.96, 1]
    noise = rng.uniform(size=height)
    kernel = np.array([1.0, 4.0, 6.0, 4.0, 1.0])
    kernel /= kernel.sum()
    rows = np.convolve(np.pad(noise, 2, mode="wrap"), kernel, mode="valid")
    texture = 1.0 - 0.04 * rows[:, None] * np.ones((1, width))
    rgb = np.repeat(texture[:, :, None], 3, axis=2)
    return BrushTemplate(rgb=rgb, alpha=alpha, ref=PROCEDURAL_REF)


def load_brush(path) -> BrushTemplate:
    """Load an RGBA raster as a brush; alpha carries the footprint."""
    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGBA"), dtype=np.float64) / 255.0
    return BrushTemplate(rgb=arr[:, :, :3], alpha=arr[:, :, 3], ref=f"file:{path}")


def resolve_brush(ref: str, base_dir=None) -> BrushTemplate:
    """Rebuild a brush from its program-header reference string."""
    if ref == PROCEDURAL_REF:
        return procedural_brush()
    if ref.startswith("file:"):
        path = ref[5:]
        if base_dir is not None:
            import os
            if not os.path.isabs(path):
                path = os.path.join(base_dir, path)
        return load_brush(path)
    raise ValueError(f"unknown brush reference {ref!r}")
