"""Closed-contour extraction from binary rasters.

Pixel (r, c) owns the unit square spanning x in [c, c+1], y in [r, r+1],
so every traced vertex sits on the pixel-boundary lattice. Boundary edges
are emitted with the filled side on the interior's left, which makes
outer loops come out with positive shoelace area (counterclockwise in
this module's convention) and hole loops negative. Foreground is treated
as 4-connected: diagonally touching pixels yield separate loops.
"""

from __future__ import annotations

import numpy as np

# outgoing edge directions, in deterministic scan order
_DIRS = ((1, 0), (0, 1), (-1, 0), (0, -1))


def _boundary_edges(mask: np.ndarray) -> dict[tuple[int, int], list[tuple[int, int]]]:
    """Map each lattice corner to the directions of edges leaving it."""
    h, w = mask.shape
    pad = np.zeros((h + 2, w + 2), dtype=bool)
    pad[1:-1, 1:-1] = mask
    edges: dict[tuple[int, int], list[tuple[int, int]]] = {}

    def add(x: int, y: int, d: tuple[int, int]) -> None:
        edges.setdefault((x, y), []).append(d)

    # top side exposed: edge runs +x along y=r
    ys, xs = np.nonzero(mask & ~pad[:-2, 1:-1])
    for r, c in zip(ys.tolist(), xs.tolist()):
        add(c, r, (1, 0))
    # right side exposed: edge runs +y along x=c+1
    ys, xs = np.nonzero(mask & ~pad[1:-1, 2:])
    for r, c in zip(ys.tolist(), xs.tolist()):
        add(c + 1, r, (0, 1))
    # bottom side exposed: edge runs -x along y=r+1
    ys, xs = np.nonzero(mask & ~pad[2:, 1:-1])
    for r, c in zip(ys.tolist(), xs.tolist()):
        add(c + 1, r + 1, (-1, 0))
    # left side exposed: edge runs -y along x=c
    ys, xs = np.nonzero(mask & ~pad[1:-1, :-2])
    for r, c in zip(ys.tolist(), xs.tolist()):
        add(c, r + 1, (0, -1))
    return edges


def _pick_direction(options: list[tuple[int, int]], incoming: tuple[int, int]) -> tuple[int, int]:
    """At an ambiguous corner, take the sharpest counterclockwise turn.

    This keeps loops of diagonally touching pixels separate (4-connected
    foreground semantics).
    """
    if len(options) == 1:
        return options[0]
    return max(options, key=lambda d: incoming[0] * d[1] - incoming[1] * d[0])


def trace_contours(mask: np.ndarray) -> list[np.ndarray]:
    """Extract all closed boundary loops of a binary raster.

    Returns one polyline per loop as an (N, 2) float array of (x, y)
    lattice corners; the closing edge back to the first vertex is
    implicit. Outer boundaries have positive signed area, holes negative.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 2:
        raise ValueError("mask must be 2-D")
    if not mask.any():
        raise ValueError("cannot trace an empty raster")
    edges = _boundary_edges(mask)
    loops: list[np.ndarray] = []
    for start in sorted(edges, key=lambda p: (p[1], p[0])):
        while edges.get(start):
            d = edges[start][0] if len(edges[start]) == 1 else min(edges[start])
            edges[start].remove(d)
            verts = [start]
            pos = (start[0] + d[0], start[1] + d[1])
            while pos != start:
                verts.append(pos)
                options = edges[pos]
                nxt = _pick_direction(options, d)
                options.remove(nxt)
                d = nxt
                pos = (pos[0] + d[0], pos[1] + d[1])
            loops.append(np.array(verts, dtype=np.float64))
    return loops


def dedupe_collinear(polyline: np.ndarray) -> np.ndarray:
    """Drop interior vertices of straight runs in a closed polyline."""
    pts = np.asarray(polyline, dtype=np.float64)
    n = len(pts)
    if n <= 3:
        return pts
    prev = pts - np.roll(pts, 1, axis=0)
    nxt = np.roll(pts, -1, axis=0) - pts
    cross = prev[:, 0] * nxt[:, 1] - prev[:, 1] * nxt[:, 0]
    keep = np.abs(cross) > 1e-12
    if not keep.any():
        return pts[:1]
    return pts[keep]
