import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def quadrant_image(size: int = 256) -> np.ndarray:
    """Four saturated flat quadrants."""
    img = np.zeros((size, size, 3), np.uint8)
    half = size // 2
    img[:half, :half] = (255, 0, 0)
    img[:half, half:] = (0, 255, 0)
    img[half:, :half] = (0, 0, 255)
    img[half:, half:] = (255, 255, 255)
    return img


def random_flat_art(rng: np.random.Generator, size: int = 96,
                    n_shapes: int | None = None) -> np.ndarray:
    """Flat-color image: a background plus 1..7 solid, non-touching shapes.

    Shapes are chunky and placed by rejection so no thin slivers appear;
    boundary effects then stay small relative to area.
    """
    palette = np.array([
        (230, 60, 40), (40, 180, 90), (50, 90, 220), (240, 200, 60),
        (150, 60, 200), (40, 200, 210), (250, 250, 250), (30, 30, 30),
    ], dtype=np.uint8)
    order = rng.permutation(len(palette))
    img = np.full((size, size, 3), palette[order[0]], dtype=np.uint8)
    if n_shapes is None:
        n_shapes = int(rng.integers(1, 8))
    yy, xx = np.mgrid[0:size, 0:size]
    taken = np.zeros((size, size), bool)
    placed = 0
    for _ in range(60):
        if placed >= n_shapes:
            break
        if rng.random() < 0.5:
            r = int(rng.integers(size // 8, size // 4))
            cx = int(rng.integers(r, size - r))
            cy = int(rng.integers(r, size - r))
            mask = (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r
        else:
            w = int(rng.integers(size // 6, size // 3))
            h = int(rng.integers(size // 6, size // 3))
            x0 = int(rng.integers(0, size - w))
            y0 = int(rng.integers(0, size - h))
            mask = np.zeros((size, size), bool)
            mask[y0:y0 + h, x0:x0 + w] = True
        grown = np.zeros_like(mask)
        ys, xs = np.nonzero(mask)
        y0g, y1g = max(0, ys.min() - 2), min(size, ys.max() + 3)
        x0g, x1g = max(0, xs.min() - 2), min(size, xs.max() + 3)
        grown[y0g:y1g, x0g:x1g] = True
        if (grown & taken).any():
            continue
        img[mask] = palette[order[(placed + 1) % len(palette)]]
        taken |= grown
        placed += 1
    return img


def random_simple_polygon(rng: np.random.Generator, n: int,
                          radius: float = 50.0) -> np.ndarray:
    """Star-shaped (hence simple) polygon around a random center."""
    angles = np.sort(rng.uniform(0, 2 * np.pi, n))
    radii = rng.uniform(0.3 * radius, radius, n)
    cx, cy = rng.uniform(20, 80, 2)
    return np.column_stack([cx + radii * np.cos(angles), cy + radii * np.sin(angles)])


def fourier_blob(rng: np.random.Generator, n_points: int = 160,
                 radius: float = 40.0) -> np.ndarray:
    """Smooth closed contour: a circle with low-frequency radial wobble."""
    t = np.linspace(0, 2 * np.pi, n_points, endpoint=False)
    r = np.full(n_points, radius)
    for k in range(2, 6):
        amp = rng.uniform(0, radius * 0.08)
        phase = rng.uniform(0, 2 * np.pi)
        r += amp * np.cos(k * t + phase)
    cx, cy = rng.uniform(60, 70, 2)
    return np.column_stack([cx + r * np.cos(t), cy + r * np.sin(t)])
