"""regionpaint: region-driven stroke-based rendering.

An input image is decomposed into non-overlapping segments, each segment
into filled vector regions, regions into proximity-ordered groups, and
every region into parametric rectangular strokes that a renderer applies
one by one onto a canvas, yielding a painting time-lapse and a final
image approximating the input.
"""

from .brush import BrushTemplate, load_brush, procedural_brush
from .config import RenderConfig, RunConfig, load_config
from .curves import CurveKind, CurveSegment, flatten_curve
from .program import (ProgramFormatError, SegmentRecord, StrokeProgram,
                      StrokeRecord, export_program, import_program,
                      parse_program, serialize_program)
from .renderer import (Canvas, StrokePatch, apply_stroke, blend,
                       blend_source_over, fidelity, make_base,
                       render_sequence, transform_brush)
from .segmentation import (LabelMapError, LabelMapWarning, SegmentMask,
                           SegmentationConfig, add_background_segment,
                           compute_iou, export_label_map, ingest_label_map,
                           order_segments, resolve_overlaps, segment_image)
from .sequencing import (RegionGroup, SequencedRegion, SequencingConfig,
                         centroid, cluster_regions, sequence_regions,
                         solve_tsp)
from .strokes import (DecompositionConfig, OrientedRect, StrokeParams,
                      estimate_theta, grid_decompose, group_cells,
                      min_rotated_rect, strokes_for_region)
from .vectorization import (TraceConfig, VectorRegion, fit_curves,
                            flatten_to_polygon, quantize_segment_colors,
                            rasterize_region, vectorize_segment)
from .geometry import polygon_area

__version__ = "0.1.0"
