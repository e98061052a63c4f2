import numpy as np
import pytest

from regionpaint.curves import CurveKind, CurveSegment
from regionpaint.program import (FORMAT_VERSION, ProgramFormatError,
                                 SegmentRecord, StrokeProgram, StrokeRecord,
                                 export_program, import_program, parse_program,
                                 serialize_program)
from regionpaint.strokes import StrokeParams
from regionpaint.vectorization import VectorRegion


def square_path(x0, y0, x1, y1):
    pts = [(x0, y0), (x1, y0), (x1, y1), (x0, y1), (x0, y0)]
    return [CurveSegment(CurveKind.LINE, np.array([pts[i], pts[i + 1]], float))
            for i in range(4)]


def sample_program():
    region = VectorRegion(path=square_path(0, 0, 10, 10), fill=(200, 30, 30),
                          centroid=(5.0, 5.0), source_segment_id=0, area=100.0, id=0)
    region.holes.append(square_path(3, 3, 5, 5)[::-1])
    region.holes[-1] = [CurveSegment(s.kind, s.control_points[::-1]) for s in region.holes[-1]]
    region2 = VectorRegion(
        path=[CurveSegment(CurveKind.CUBIC,
                           np.array([(0, 0), (3.5, -1.25), (7.5, -1.25), (11, 0)])),
              CurveSegment(CurveKind.QUADRATIC, np.array([(11, 0), (5.5, 9.0), (0, 0)]))],
        fill=(10, 220, 10), centroid=(5.5, 2.0), source_segment_id=1, area=40.0, id=1)
    region3 = VectorRegion(
        path=[CurveSegment(CurveKind.CIRCULAR_ARC, np.array([(0, 0), (5, 5), (10, 0)])),
              CurveSegment(CurveKind.ELLIPTICAL_ARC, np.array([(10, 0), (5, -3), (0, 0)]),
                           axis_ratio=0.5)],
        fill=(5, 5, 250), centroid=(5.0, 1.0), source_segment_id=1, area=30.0, id=2)
    strokes = [
        StrokeRecord(rank=0, segment_id=0, group_id=0, region_id=0,
                     params=StrokeParams(x=5.0, y=5.0, w=10.0, h=10.0, theta=0.0,
                                         r=200, g=30, b=30)),
        StrokeRecord(rank=1, segment_id=1, group_id=1, region_id=1,
                     params=StrokeParams(x=5.5, y=2.0, w=11.0, h=4.5, theta=171.25,
                                         r=10, g=220, b=10)),
        StrokeRecord(rank=2, segment_id=1, group_id=1, region_id=2,
                     params=StrokeParams(x=5.0, y=1.0, w=10.0, h=8.0, theta=0.125,
                                         r=5, g=5, b=250)),
    ]
    return StrokeProgram(
        image_path="inputs/still life.png", width=64, height=48, seed=7,
        blend_mode="multiply", brush_ref="procedural:v1",
        config={"seed": 7, "trace": {"fit_tolerance": 1.0}},
        segments=[SegmentRecord(id=0, area=900, bbox=(0, 0, 30, 30)),
                  SegmentRecord(id=1, area=100, bbox=(30, 0, 12, 10), background=True)],
        regions=[region, region2, region3],
        strokes=strokes)


def test_round_trip_identical_text():
    program = sample_program()
    text = serialize_program(program)
    back = parse_program(text)
    assert serialize_program(back) == text


def test_round_trip_preserves_values():
    program = sample_program()
    back = parse_program(serialize_program(program))
    assert back.image_path == "inputs/still life.png"
    assert (back.width, back.height) == (64, 48)
    assert back.seed == 7
    assert back.config == program.config
    assert len(back.regions) == 3
    assert back.regions[0].fill == (200, 30, 30)
    assert len(back.regions[0].holes) == 1
    np.testing.assert_array_equal(back.regions[2].path[1].control_points,
                                  program.regions[2].path[1].control_points)
    assert back.regions[2].path[1].axis_ratio == 0.5
    assert back.strokes[1].params.theta == 171.25
    assert back.segments[1].background is True


def test_file_round_trip(tmp_path):
    path = tmp_path / "p.strokes"
    export_program(sample_program(), path)
    back = import_program(path)
    assert len(back.strokes) == 3


def test_truncated_file_reports_offset(tmp_path):
    text = serialize_program(sample_program())
    truncated = text[: len(text) // 2]
    cut = truncated.rfind("\n")
    truncated = truncated[:cut + 1]
    with pytest.raises(ProgramFormatError, match="byte"):
        parse_program(truncated)
    try:
        parse_program(truncated)
    except ProgramFormatError as e:
        assert e.offset is not None and e.offset > 0


def test_out_of_order_ranks_rejected():
    program = sample_program()
    program.strokes[1], program.strokes[2] = program.strokes[2], program.strokes[1]
    with pytest.raises(ProgramFormatError, match="strictly increasing"):
        serialize_program(program)
    text = serialize_program(sample_program())
    swapped = []
    stroke_lines = [l for l in text.splitlines() if l.startswith("stroke ")]
    for line in text.splitlines():
        if line == stroke_lines[1]:
            swapped.append(stroke_lines[2])
        elif line == stroke_lines[2]:
            swapped.append(stroke_lines[1])
        else:
            swapped.append(line)
    with pytest.raises(ProgramFormatError, match="strictly increasing"):
        parse_program("\n".join(swapped) + "\n")


def test_unknown_region_reference_rejected():
    program = sample_program()
    program.strokes[0].region_id = 99
    with pytest.raises(ProgramFormatError, match="unknown region"):
        serialize_program(program)


def test_version_mismatch_rejected():
    text = serialize_program(sample_program())
    bumped = text.replace(f"regionpaint-program {FORMAT_VERSION}",
                          "regionpaint-program 999", 1)
    with pytest.raises(ProgramFormatError, match="version"):
        parse_program(bumped)


def test_bad_curve_cardinality_rejected():
    text = serialize_program(sample_program())
    lines = text.splitlines()
    for i, line in enumerate(lines):
        if line.startswith("curve line"):
            lines[i] = line + " 99.0,99.0"  # three points on a line record
            break
    with pytest.raises(ProgramFormatError):
        parse_program("\n".join(lines) + "\n")


def test_not_a_program_file():
    with pytest.raises(ProgramFormatError):
        parse_program("just some text\n")
    with pytest.raises(ProgramFormatError):
        parse_program("")


def test_float_precision_survives():
    program = sample_program()
    program.strokes[0].params.x = 1.0000000000000002  # one ulp above 1
    back = parse_program(serialize_program(program))
    assert back.strokes[0].params.x == 1.0000000000000002
