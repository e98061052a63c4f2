"""Command-line interface.

Subcommands run the full pipeline (`paint`), individual stages with
file-based inputs/outputs (`segment`, `vectorize`, `sequence`, `render`),
or re-render a saved program (`replay`).
"""

from __future__ import annotations

import argparse
import json
import sys

from . import pipeline
from .brush import PROCEDURAL_REF
from .config import RunConfig, load_config
from .program import ProgramFormatError, export_program
from .segmentation import (LabelMapError, export_label_map, ingest_label_map,
                           reindex_segments)
from .svgio import write_svg


def _load_run_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if getattr(args, "seed", None) is not None:
        import dataclasses
        cfg = dataclasses.replace(cfg, seed=args.seed)
    if getattr(args, "blend_mode", None):
        import dataclasses
        cfg = dataclasses.replace(
            cfg, render=dataclasses.replace(cfg.render, blend_mode=args.blend_mode))
    return cfg


def _cmd_paint(args) -> int:
    cfg = _load_run_config(args)
    if args.replay:
        report = pipeline.replay_program(args.replay, args.out_dir,
                                         brush_path=args.brush,
                                         frame_policy=args.frame_policy)
    else:
        if not args.input:
            raise SystemExit("paint requires --input (or --replay)")
        report = pipeline.run_paint(args.input, cfg, args.out_dir,
                                    label_map_path=args.label_map,
                                    brush_path=args.brush,
                                    frame_policy=args.frame_policy,
                                    make_gif=args.gif)
    print(json.dumps(report, indent=2))
    return 0


def _cmd_segment(args) -> int:
    cfg = _load_run_config(args)
    image = pipeline.load_image(args.input)
    h, w = image.shape[:2]
    cfg = cfg.resolved((w, h))
    segments = pipeline.stage_segment(image, cfg, label_map=args.label_map)
    export_label_map(segments, args.out)
    if args.json:
        pipeline.write_segments_json(segments, (w, h), args.json)
    print(f"{len(segments)} segments -> {args.out}")
    return 0


def _cmd_vectorize(args) -> int:
    cfg = _load_run_config(args)
    image = pipeline.load_image(args.input)
    h, w = image.shape[:2]
    cfg = cfg.resolved((w, h))
    masks = ingest_label_map(args.segments, (w, h))
    segments = reindex_segments(masks)
    regions = pipeline.stage_vectorize(image, segments, cfg)
    write_svg(regions, w, h, args.out)
    print(f"{len(regions)} regions -> {args.out}")
    return 0


def _cmd_sequence(args) -> int:
    cfg = _load_run_config(args)
    image = pipeline.load_image(args.input)
    h, w = image.shape[:2]
    cfg = cfg.resolved((w, h))
    segments = pipeline.stage_segment(image, cfg, label_map=args.label_map)
    regions = pipeline.stage_vectorize(image, segments, cfg)
    sequenced = pipeline.stage_sequence(regions, cfg, (w, h))
    strokes = pipeline.stage_strokes(sequenced, cfg, (w, h))
    program = pipeline.build_program(args.input, image, cfg, segments, regions,
                                     strokes, PROCEDURAL_REF)
    export_program(program, args.out)
    print(f"{len(strokes)} strokes -> {args.out}")
    return 0


def _cmd_render(args) -> int:
    report = pipeline.replay_program(args.program, args.out_dir,
                                     brush_path=args.brush,
                                     frame_policy=args.frame_policy)
    print(json.dumps(report, indent=2))
    return 0


def _cmd_replay(args) -> int:
    return _cmd_render(args)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="regionpaint",
        description="Turn an image into an ordered brush-stroke program and "
                    "render it as a painting time-lapse.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True):
        if needs_input:
            p.add_argument("--input", help="input image path")
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, default=None, help="override the global seed")

    p = sub.add_parser("paint", help="run the full pipeline")
    common(p)
    p.add_argument("--label-map", help="16-bit label raster replacing the built-in segmenter")
    p.add_argument("--brush", help="RGBA brush template image")
    p.add_argument("--out-dir", required=True, help="output directory")
    p.add_argument("--frame-policy",
                   help="auto | stroke | group | region | segment | none | every:K")
    p.add_argument("--blend-mode", choices=["multiply", "source_over"], default=None)
    p.add_argument("--gif", action="store_true", help="assemble frames into timelapse.gif")
    p.add_argument("--replay", help="re-render a saved program instead of painting")
    p.set_defaults(func=_cmd_paint)

    p = sub.add_parser("segment", help="segment an image to a label map")
    common(p)
    p.add_argument("--label-map", help="ingest this label map instead of segmenting")
    p.add_argument("--out", required=True, help="output label-map PNG (16-bit)")
    p.add_argument("--json", help="also write segment metadata JSON")
    p.set_defaults(func=_cmd_segment)

    p = sub.add_parser("vectorize", help="vectorize segments to an SVG document")
    common(p)
    p.add_argument("--segments", required=True, help="label map from the segment stage")
    p.add_argument("--out", required=True, help="output SVG path")
    p.set_defaults(func=_cmd_vectorize)

    p = sub.add_parser("sequence", help="build the full stroke program")
    common(p)
    p.add_argument("--label-map", help="16-bit label raster replacing the built-in segmenter")
    p.add_argument("--out", required=True, help="output program file")
    p.set_defaults(func=_cmd_sequence)

    for name, help_text in (("render", "render a stroke program"),
                            ("replay", "re-render a saved program (bit-identical)")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--program", required=True, help="program file")
        p.add_argument("--out-dir", required=True, help="output directory")
        p.add_argument("--brush", help="override the program's brush")
        p.add_argument("--frame-policy", help="override the program's frame policy")
        p.set_defaults(func=_cmd_render if name == "render" else _cmd_replay)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (LabelMapError, ProgramFormatError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
