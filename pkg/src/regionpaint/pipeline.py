"""End-to-end orchestration: image file in, painted artifacts out.

Each stage is callable on its own (the CLI exposes them as subcommands);
`run_paint` chains them, writes every artifact, and reports counts,
fidelity, and per-stage wall time. `replay_program` re-renders a saved
program byte-for-byte.
"""

from __future__ import annotations

import contextlib
import json
import os
import time

import numpy as np
from PIL import Image

from .brush import BrushTemplate, load_brush, procedural_brush, resolve_brush
from .config import RunConfig
from .program import (SegmentRecord, StrokeProgram, StrokeRecord, export_program,
                      import_program)
from .renderer import fidelity, render_sequence
from .segmentation import (SegmentMask, add_background_segment, export_label_map,
                           ingest_label_map, order_segments, reindex_segments,
                           resolve_overlaps, segment_image)
from .sequencing import SequencedRegion, sequence_regions
from .strokes import strokes_for_region
from .svgio import write_svg
from .vectorization import (VectorRegion, flatten_loop, rasterize_region,
                            vectorize_segment)


@contextlib.contextmanager
def _stage(name: str):
    """Prefix stage failures with the stage name for CLI error reports."""
    try:
        yield
    except Exception as e:
        raise type(e)(f"stage {name}: {e}") from e


def load_image(path) -> np.ndarray:
    if not os.path.exists(path):
        raise FileNotFoundError(f"input image not found: {path}")
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"))


def save_image(array: np.ndarray, path) -> None:
    Image.fromarray(np.asarray(array, dtype=np.uint8)).save(path)


def stage_segment(image: np.ndarray, cfg: RunConfig,
                  label_map=None) -> list[SegmentMask]:
    """Produce the paint-ordered, disjoint segment list (background first)."""
    h, w = image.shape[:2]
    if label_map is not None:
        raw = ingest_label_map(label_map, (w, h))
    else:
        raw = segment_image(image, cfg.segmentation)
    resolved = resolve_overlaps(raw, cfg.segmentation)
    ordered = order_segments(resolved)
    ordered = add_background_segment(ordered, (w, h))
    return reindex_segments(ordered)


def stage_vectorize(image: np.ndarray, segments: list[SegmentMask],
                    cfg: RunConfig) -> list[VectorRegion]:
    """Vectorize every segment; region ids are global and paint-ordered."""
    regions: list[VectorRegion] = []
    for seg in segments:
        regions.extend(vectorize_segment(seg, image, cfg.trace))
    for i, r in enumerate(regions):
        r.id = i
    return regions


def stage_sequence(regions: list[VectorRegion], cfg: RunConfig,
                   image_size: tuple[int, int]) -> list[SequencedRegion]:
    return sequence_regions(regions, cfg.sequencing, image_size)


def stage_strokes(sequenced: list[SequencedRegion], cfg: RunConfig,
                  image_size: tuple[int, int]) -> list[StrokeRecord]:
    """One stroke batch per sequenced region, globally ranked."""
    dec = cfg.decomposition.resolved(image_size)
    records: list[StrokeRecord] = []
    rank = 0
    for sr in sequenced:
        region = sr.region
        outer = flatten_loop(region.path, cfg.trace.flatten_tolerance)
        holes = [flatten_loop(h, cfg.trace.flatten_tolerance) for h in region.holes]
        for params in strokes_for_region(outer, region.fill, dec, holes=holes):
            records.append(StrokeRecord(rank=rank, segment_id=sr.segment_id,
                                        group_id=sr.group_id, region_id=region.id,
                                        params=params))
            rank += 1
    return records


def build_program(image_path: str, image: np.ndarray, cfg: RunConfig,
                  segments: list[SegmentMask], regions: list[VectorRegion],
                  strokes: list[StrokeRecord], brush_ref: str) -> StrokeProgram:
    h, w = image.shape[:2]
    return StrokeProgram(
        image_path=str(image_path), width=w, height=h, seed=cfg.seed,
        blend_mode=cfg.render.blend_mode, brush_ref=brush_ref,
        config=cfg.to_dict(),
        segments=[SegmentRecord(id=s.id, area=s.area, bbox=s.bbox, background=s.background)
                  for s in segments],
        regions=regions, strokes=strokes)


def render_program(program: StrokeProgram, template: BrushTemplate,
                   out_dir=None, frame_policy: str | None = None,
                   collect_frames: bool = False):
    """Render a program; optionally stream frames to `out_dir`/frames."""
    masks = {r.id: rasterize_region(r, program.width, program.height)
             for r in program.regions}
    fills = {r.id: r.fill for r in program.regions}
    policy = frame_policy or program.config.get("render", {}).get("frame_policy", "auto")
    frame_dir = None
    on_frame = None
    if out_dir is not None:
        frame_dir = os.path.join(out_dir, "frames")
        os.makedirs(frame_dir, exist_ok=True)

        def on_frame(index: int, frame: np.ndarray) -> None:
            save_image(frame, os.path.join(frame_dir, f"frame_{index:06d}.png"))

    frames, final, report = render_sequence(
        program.strokes, masks, fills, program.width, program.height, template,
        blend_mode=program.blend_mode, frame_policy=policy,
        on_frame=on_frame, collect_frames=collect_frames)
    return frames, final, report


def assemble_gif(out_dir, delay_ms: int) -> str | None:
    """Stitch written frames into an animated GIF; returns its path."""
    frame_dir = os.path.join(out_dir, "frames")
    if not os.path.isdir(frame_dir):
        return None
    names = sorted(n for n in os.listdir(frame_dir) if n.endswith(".png"))
    if not names:
        return None
    gif_path = os.path.join(out_dir, "timelapse.gif")
    first = Image.open(os.path.join(frame_dir, names[0])).convert("P", palette=Image.ADAPTIVE)
    rest = (Image.open(os.path.join(frame_dir, n)).convert("P", palette=Image.ADAPTIVE)
            for n in names[1:])
    first.save(gif_path, save_all=True, append_images=rest,
               duration=delay_ms, loop=0)
    return gif_path


def run_paint(image_path, cfg: RunConfig, out_dir, label_map_path=None,
              brush_path=None, frame_policy: str | None = None,
              make_gif: bool = False) -> dict:
    """Full pipeline run; returns the report dict (also written to disk)."""
    os.makedirs(out_dir, exist_ok=True)
    image = load_image(image_path)
    h, w = image.shape[:2]
    cfg = cfg.resolved((w, h))
    if label_map_path is None and cfg.segmentation.method == "label-map":
        raise ValueError("config requests label-map segmentation but no label map was given")
    if label_map_path is not None and cfg.segmentation.method != "label-map":
        import dataclasses
        cfg = dataclasses.replace(
            cfg, segmentation=dataclasses.replace(cfg.segmentation, method="label-map"))
    if brush_path is not None:
        template = load_brush(brush_path)
    else:
        template = procedural_brush()

    timings: dict[str, float] = {}

    t0 = time.perf_counter()
    with _stage("segment"):
        segments = stage_segment(image, cfg, label_map=label_map_path)
    timings["segment_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    with _stage("vectorize"):
        regions = stage_vectorize(image, segments, cfg)
    timings["vectorize_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    with _stage("sequence"):
        sequenced = stage_sequence(regions, cfg, (w, h))
    timings["sequence_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    with _stage("strokes"):
        strokes = stage_strokes(sequenced, cfg, (w, h))
    timings["strokes_s"] = time.perf_counter() - t0

    program = build_program(image_path, image, cfg, segments, regions, strokes,
                            template.ref)
    program_path = os.path.join(out_dir, "program.strokes")
    export_program(program, program_path)
    export_label_map(segments, os.path.join(out_dir, "segments.png"))
    write_segments_json(segments, (w, h), os.path.join(out_dir, "segments.json"))
    write_svg(regions, w, h, os.path.join(out_dir, "regions.svg"))

    t0 = time.perf_counter()
    _, final, render_report = render_program(
        program, template, out_dir=out_dir, frame_policy=frame_policy)
    timings["render_s"] = time.perf_counter() - t0
    save_image(final, os.path.join(out_dir, "final.png"))

    gif_path = None
    if make_gif:
        gif_path = assemble_gif(out_dir, cfg.render.frame_delay_ms)

    mse, psnr = fidelity(final, image)
    groups = {sr.group_id for sr in sequenced}
    report = {
        "image": str(image_path),
        "size": [w, h],
        "counts": {
            "segments": len(segments),
            "regions": len(regions),
            "groups": len(groups),
            "strokes": len(strokes),
            "strokes_applied": render_report.strokes_applied,
            "strokes_skipped": render_report.strokes_skipped,
            "frames": render_report.frames_emitted,
        },
        "fidelity": {"mse": mse, "psnr_db": None if psnr == float("inf") else psnr},
        "timings": {**timings, "total_s": sum(timings.values())},
        "artifacts": {
            "program": program_path,
            "final": os.path.join(out_dir, "final.png"),
            "label_map": os.path.join(out_dir, "segments.png"),
            "svg": os.path.join(out_dir, "regions.svg"),
            "gif": gif_path,
        },
        "warnings": render_report.warnings,
    }
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as f:
        json.dump(report, f, indent=2)
    return report


def replay_program(program_path, out_dir, brush_path=None,
                   frame_policy: str | None = None) -> dict:
    """Re-render a saved program; deterministic given the same brush."""
    os.makedirs(out_dir, exist_ok=True)
    program = import_program(program_path)
    if brush_path is not None:
        template = load_brush(brush_path)
    else:
        template = resolve_brush(program.brush_ref,
                                 base_dir=os.path.dirname(os.path.abspath(program_path)))
    t0 = time.perf_counter()
    _, final, render_report = render_program(
        program, template, out_dir=out_dir, frame_policy=frame_policy)
    elapsed = time.perf_counter() - t0
    save_image(final, os.path.join(out_dir, "final.png"))
    report = {
        "program": str(program_path),
        "size": [program.width, program.height],
        "counts": {
            "strokes": len(program.strokes),
            "strokes_applied": render_report.strokes_applied,
            "strokes_skipped": render_report.strokes_skipped,
            "frames": render_report.frames_emitted,
        },
        "timings": {"render_s": elapsed},
        "warnings": render_report.warnings,
    }
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as f:
        json.dump(report, f, indent=2)
    return report


def write_segments_json(segments: list[SegmentMask], image_size: tuple[int, int],
                        path) -> None:
    data = {
        "width": image_size[0],
        "height": image_size[1],
        "segments": [
            {"id": s.id, "area": s.area, "bbox": list(s.bbox), "background": s.background}
            for s in segments
        ],
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2)
