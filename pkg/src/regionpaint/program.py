"""The stroke program: the serialized, replayable painting hierarchy.

A program records segments, vector regions (curve loops plus fills), and
the fully ordered stroke list with parameters, plus a config snapshot
sufficient to re-render without the original config file. The format is
a versioned line-oriented text file, diffable and lossless (floats are
written with repr round-tripping).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .curves import CurveKind, CurveSegment
from .strokes import StrokeParams
from .vectorization import VectorRegion

FORMAT_NAME = "regionpaint-program"
FORMAT_VERSION = 1


class ProgramFormatError(ValueError):
    """Malformed program file; carries the byte offset of the bad line."""

    def __init__(self, message: str, line: int | None = None, offset: int | None = None):
        loc = ""
        if line is not None:
            loc = f" (line {line}, byte offset {offset})"
        super().__init__(message + loc)
        self.line = line
        self.offset = offset


@dataclass
class SegmentRecord:
    id: int
    area: int
    bbox: tuple[int, int, int, int]
    background: bool = False


@dataclass
class StrokeRecord:
    rank: int
    segment_id: int
    group_id: int
    region_id: int
    params: StrokeParams


@dataclass
class StrokeProgram:
    image_path: str
    width: int
    height: int
    seed: int
    blend_mode: str
    brush_ref: str
    config: dict
    segments: list[SegmentRecord] = field(default_factory=list)
    regions: list[VectorRegion] = field(default_factory=list)
    strokes: list[StrokeRecord] = field(default_factory=list)

    def validate(self) -> None:
        region_ids = set()
        for r in self.regions:
            if r.id is None:
                raise ProgramFormatError("region without an id")
            if r.id in region_ids:
                raise ProgramFormatError(f"duplicate region id {r.id}")
            region_ids.add(r.id)
            r.validate()
        segment_ids = {s.id for s in self.segments}
        prev_rank = None
        for s in self.strokes:
            if prev_rank is not None and s.rank <= prev_rank:
                raise ProgramFormatError(
                    f"stroke ranks must be strictly increasing, got {s.rank} after {prev_rank}")
            prev_rank = s.rank
            if s.region_id not in region_ids:
                raise ProgramFormatError(f"stroke {s.rank} references unknown region {s.region_id}")
            if s.segment_id not in segment_ids:
                raise ProgramFormatError(f"stroke {s.rank} references unknown segment {s.segment_id}")


def _fmt_float(v: float) -> str:
    return repr(float(v))


def _fmt_point(p) -> str:
    return f"{_fmt_float(p[0])},{_fmt_float(p[1])}"


def _curve_line(seg: CurveSegment) -> str:
    parts = ["curve", seg.kind.value] + [_fmt_point(p) for p in seg.control_points]
    if seg.axis_ratio is not None:
        parts.append(f"ratio={_fmt_float(seg.axis_ratio)}")
    return " ".join(parts)


def serialize_program(program: StrokeProgram) -> str:
    program.validate()
    lines = [
        f"{FORMAT_NAME} {FORMAT_VERSION}",
        f"image {program.image_path}",
        f"size {program.width} {program.height}",
        f"seed {program.seed}",
        f"blend {program.blend_mode}",
        f"brush {program.brush_ref}",
        "config " + json.dumps(program.config, sort_keys=True, separators=(",", ":")),
    ]
    for s in program.segments:
        lines.append(
            f"segment {s.id} area={s.area} bbox={s.bbox[0]},{s.bbox[1]},{s.bbox[2]},{s.bbox[3]} "
            f"background={int(s.background)}")
    for r in program.regions:
        lines.append(
            f"region {r.id} segment={r.source_segment_id} fill={r.fill[0]},{r.fill[1]},{r.fill[2]} "
            f"centroid={_fmt_point(r.centroid)} area={_fmt_float(r.area)}")
        for seg in r.path:
            lines.append(_curve_line(seg))
        for hole in r.holes:
            lines.append("holeloop")
            for seg in hole:
                lines.append(_curve_line(seg))
    for s in program.strokes:
        p = s.params
        lines.append(
            f"stroke {s.rank} segment={s.segment_id} group={s.group_id} region={s.region_id} "
            f"x={_fmt_float(p.x)} y={_fmt_float(p.y)} w={_fmt_float(p.w)} h={_fmt_float(p.h)} "
            f"theta={_fmt_float(p.theta)} color={p.r},{p.g},{p.b}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def export_program(program: StrokeProgram, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(serialize_program(program))


class _Reader:
    def __init__(self, text: str):
        self.lines = text.split("\n")
        self.index = 0
        self.offset = 0

    def peek(self) -> str | None:
        i = self.index
        while i < len(self.lines):
            if self.lines[i].strip():
                return self.lines[i]
            i += 1
        return None

    def next(self) -> str | None:
        while self.index < len(self.lines):
            line = self.lines[self.index]
            self.index += 1
            self.offset += len(line.encode("utf-8")) + 1
            if line.strip():
                return line
        return None

    def error(self, message: str) -> ProgramFormatError:
        line_no = self.index
        offset = self.offset - (len(self.lines[self.index - 1].encode("utf-8")) + 1
                                if 0 < self.index <= len(self.lines) else 0)
        return ProgramFormatError(message, line=line_no, offset=max(0, offset))


def _parse_kv(tokens: list[str], reader: _Reader) -> dict[str, str]:
    out = {}
    for tok in tokens:
        if "=" not in tok:
            raise reader.error(f"expected key=value, got {tok!r}")
        k, v = tok.split("=", 1)
        out[k] = v
    return out


def _parse_point(tok: str, reader: _Reader) -> tuple[float, float]:
    try:
        x, y = tok.split(",")
        return float(x), float(y)
    except ValueError:
        raise reader.error(f"bad point {tok!r}") from None


def _parse_ints(tok: str, n: int, reader: _Reader) -> tuple[int, ...]:
    try:
        vals = tuple(int(t) for t in tok.split(","))
    except ValueError:
        raise reader.error(f"bad integer tuple {tok!r}") from None
    if len(vals) != n:
        raise reader.error(f"expected {n} integers, got {tok!r}")
    return vals


def parse_program(text: str) -> StrokeProgram:
    reader = _Reader(text)
    header = reader.next()
    if header is None:
        raise ProgramFormatError("empty program file", line=0, offset=0)
    parts = header.split()
    if len(parts) != 2 or parts[0] != FORMAT_NAME:
        raise reader.error(f"not a {FORMAT_NAME} file")
    if parts[1] != str(FORMAT_VERSION):
        raise reader.error(f"unsupported format version {parts[1]} (expected {FORMAT_VERSION})")

    def expect(keyword: str) -> str:
        line = reader.next()
        if line is None or not line.startswith(keyword + " "):
            raise reader.error(f"expected {keyword!r} record")
        return line[len(keyword) + 1:]

    image_path = expect("image")
    try:
        w_s, h_s = expect("size").split()
        width, height = int(w_s), int(h_s)
    except ValueError:
        raise reader.error("bad size record") from None
    try:
        seed = int(expect("seed"))
    except ValueError:
        raise reader.error("bad seed record") from None
    blend_mode = expect("blend")
    brush_ref = expect("brush")
    try:
        config = json.loads(expect("config"))
    except json.JSONDecodeError as e:
        raise reader.error(f"bad config json: {e}") from None

    program = StrokeProgram(image_path=image_path, width=width, height=height,
                            seed=seed, blend_mode=blend_mode, brush_ref=brush_ref,
                            config=config)
    current_region: VectorRegion | None = None
    current_loop: list[CurveSegment] | None = None
    saw_end = False
    while True:
        line = reader.next()
        if line is None:
            break
        tokens = line.split()
        kind = tokens[0]
        if kind == "end":
            saw_end = True
            break
        if kind == "segment":
            kv = _parse_kv(tokens[2:], reader)
            try:
                program.segments.append(SegmentRecord(
                    id=int(tokens[1]), area=int(kv["area"]),
                    bbox=_parse_ints(kv["bbox"], 4, reader),
                    background=bool(int(kv.get("background", "0")))))
            except (KeyError, ValueError, IndexError):
                raise reader.error("bad segment record") from None
        elif kind == "region":
            kv = _parse_kv(tokens[2:], reader)
            try:
                current_region = VectorRegion(
                    path=[], holes=[],
                    fill=_parse_ints(kv["fill"], 3, reader),
                    centroid=_parse_point(kv["centroid"], reader),
                    source_segment_id=int(kv["segment"]),
                    area=float(kv["area"]),
                    id=int(tokens[1]))
            except (KeyError, ValueError, IndexError):
                raise reader.error("bad region record") from None
            program.regions.append(current_region)
            current_loop = current_region.path
        elif kind == "holeloop":
            if current_region is None:
                raise reader.error("holeloop outside a region")
            current_loop = []
            current_region.holes.append(current_loop)
        elif kind == "curve":
            if current_loop is None:
                raise reader.error("curve outside a region")
            try:
                ckind = CurveKind(tokens[1])
            except ValueError:
                raise reader.error(f"unknown curve kind {tokens[1]!r}") from None
            ratio = None
            pts = []
            for tok in tokens[2:]:
                if tok.startswith("ratio="):
                    ratio = float(tok[6:])
                else:
                    pts.append(_parse_point(tok, reader))
            try:
                current_loop.append(CurveSegment(ckind, np.array(pts), axis_ratio=ratio))
            except ValueError as e:
                raise reader.error(str(e)) from None
        elif kind == "stroke":
            kv = _parse_kv(tokens[2:], reader)
            try:
                color = _parse_ints(kv["color"], 3, reader)
                params = StrokeParams(
                    x=float(kv["x"]), y=float(kv["y"]), w=float(kv["w"]), h=float(kv["h"]),
                    theta=float(kv["theta"]), r=color[0], g=color[1], b=color[2])
                program.strokes.append(StrokeRecord(
                    rank=int(tokens[1]), segment_id=int(kv["segment"]),
                    group_id=int(kv["group"]), region_id=int(kv["region"]),
                    params=params))
            except (KeyError, ValueError, IndexError) as e:
                raise reader.error(f"bad stroke record: {e}") from None
        else:
            raise reader.error(f"unknown record {kind!r}")
    if not saw_end:
        raise ProgramFormatError(
            "truncated program file (missing 'end')",
            line=reader.index, offset=reader.offset)
    try:
        program.validate()
    except ProgramFormatError:
        raise
    except ValueError as e:
        raise ProgramFormatError(str(e)) from None
    return program


def import_program(path) -> StrokeProgram:
    with open(path, "r", encoding="utf-8") as f:
        return parse_program(f.read())
