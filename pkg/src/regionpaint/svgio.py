"""SVG export of vector regions, for visual inspection.

One group per source segment, one filled path per region; holes ride
along as extra subpaths under the even-odd fill rule. Lines and Beziers
map to native path commands; arcs are flattened to short line chains.
"""

from __future__ import annotations

from .curves import CurveKind, CurveSegment, flatten_curve
from .vectorization import VectorRegion


def _fmt(v: float) -> str:
    return f"{v:.3f}".rstrip("0").rstrip(".")


def _loop_to_path(loop: list[CurveSegment]) -> str:
    cmds = [f"M {_fmt(loop[0].start[0])} {_fmt(loop[0].start[1])}"]
    for seg in loop:
        p = seg.control_points
        if seg.kind is CurveKind.LINE:
            cmds.append(f"L {_fmt(p[1][0])} {_fmt(p[1][1])}")
        elif seg.kind is CurveKind.QUADRATIC:
            cmds.append(f"Q {_fmt(p[1][0])} {_fmt(p[1][1])} {_fmt(p[2][0])} {_fmt(p[2][1])}")
        elif seg.kind is CurveKind.CUBIC:
            cmds.append(
                f"C {_fmt(p[1][0])} {_fmt(p[1][1])} {_fmt(p[2][0])} {_fmt(p[2][1])} "
                f"{_fmt(p[3][0])} {_fmt(p[3][1])}")
        else:
            for q in flatten_curve(seg, 0.25)[1:]:
                cmds.append(f"L {_fmt(q[0])} {_fmt(q[1])}")
    cmds.append("Z")
    return " ".join(cmds)


def regions_to_svg(regions: list[VectorRegion], width: int, height: int) -> str:
    by_segment: dict[int, list[VectorRegion]] = {}
    for r in regions:
        by_segment.setdefault(r.source_segment_id, []).append(r)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
    ]
    for seg_id in sorted(by_segment):
        out.append(f'  <g id="segment-{seg_id}">')
        for r in by_segment[seg_id]:
            d = " ".join(_loop_to_path(loop) for loop in r.loops())
            fill = "#{:02x}{:02x}{:02x}".format(*r.fill)
            rid = r.id if r.id is not None else ""
            out.append(f'    <path id="region-{rid}" d="{d}" fill="{fill}" fill-rule="evenodd"/>')
        out.append("  </g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(regions: list[VectorRegion], width: int, height: int, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(regions_to_svg(regions, width, height))
