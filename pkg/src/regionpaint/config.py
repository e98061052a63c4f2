"""Run configuration: one strict dataclass per stage plus the aggregate.

Config files are JSON with the same nesting as `RunConfig.to_dict()`.
Unknown keys are rejected everywhere so typos fail loudly, and `None`
leaves a value to be derived from the image at run time.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

from .renderer import BLEND_MODES
from .segmentation import SegmentationConfig
from .sequencing import SequencingConfig
from .strokes import DecompositionConfig
from .vectorization import TraceConfig

_FRAME_POLICIES = ("auto", "stroke", "group", "region", "segment", "none")


@dataclass
class RenderConfig:
    blend_mode: str = "multiply"
    frame_policy: str = "auto"
    frame_delay_ms: int = 40

    def __post_init__(self):
        if self.blend_mode not in BLEND_MODES:
            raise ValueError(f"blend_mode must be one of {BLEND_MODES}")
        ok = self.frame_policy in _FRAME_POLICIES or self.frame_policy.startswith("every:")
        if not ok:
            raise ValueError(f"unknown frame_policy {self.frame_policy!r}")
        if self.frame_delay_ms < 1:
            raise ValueError("frame_delay_ms must be >= 1")


def _from_dict(cls, data: dict, context: str):
    if not isinstance(data, dict):
        raise ValueError(f"{context}: expected an object")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ValueError(f"{context}: unknown keys {sorted(unknown)}")
    return cls(**data)


@dataclass
class RunConfig:
    seed: int = 0
    segmentation: SegmentationConfig = field(default_factory=SegmentationConfig)
    trace: TraceConfig = field(default_factory=TraceConfig)
    sequencing: SequencingConfig = field(default_factory=SequencingConfig)
    decomposition: DecompositionConfig = field(default_factory=DecompositionConfig)
    render: RenderConfig = field(default_factory=RenderConfig)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ValueError("config root must be an object")
        known = {"seed", "segmentation", "trace", "sequencing", "decomposition", "render"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"config: unknown keys {sorted(unknown)}")
        return cls(
            seed=int(data.get("seed", 0)),
            segmentation=_from_dict(SegmentationConfig, data.get("segmentation", {}), "segmentation"),
            trace=_from_dict(TraceConfig, data.get("trace", {}), "trace"),
            sequencing=_from_dict(SequencingConfig, data.get("sequencing", {}), "sequencing"),
            decomposition=_from_dict(DecompositionConfig, data.get("decomposition", {}), "decomposition"),
            render=_from_dict(RenderConfig, data.get("render", {}), "render"),
        )

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "segmentation": dataclasses.asdict(self.segmentation),
            "trace": dataclasses.asdict(self.trace),
            "sequencing": dataclasses.asdict(self.sequencing),
            "decomposition": dataclasses.asdict(self.decomposition),
            "render": dataclasses.asdict(self.render),
        }

    def resolved(self, image_size: tuple[int, int]) -> "RunConfig":
        """Fill image-derived defaults so the snapshot replays standalone."""
        w, h = image_size
        seg = dataclasses.replace(
            self.segmentation,
            min_segment_area=self.segmentation.resolved_min_area(w, h),
            seed=self.seed if self.segmentation.seed == 0 else self.segmentation.seed)
        seq = dataclasses.replace(
            self.sequencing,
            cluster_distance_cutoff=self.sequencing.resolved_cutoff(image_size))
        dec = self.decomposition.resolved(image_size)
        return RunConfig(seed=self.seed, segmentation=seg, trace=self.trace,
                         sequencing=seq, decomposition=dec, render=self.render)


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ValueError(f"config file {path}: invalid JSON ({e})") from None
    return RunConfig.from_dict(data)
