/**
 * Shared types for the label-map exporter.
 */

/** 8-bit RGB image in row-major HWC layout. */
export interface RgbImage {
  width: number;
  height: number;
  /** length = width * height * 3 */
  data: Uint8Array;
}

/** One candidate mask produced for a point prompt. */
export interface MaskCandidate {
  /** Raw mask logits at image resolution; > 0 means foreground. */
  logits: Float32Array;
  width: number;
  height: number;
  /** The model's own quality estimate in [0, 1]. */
  predictedIou: number;
}

/** A binarized, scored mask retained by the generator. */
export interface RawMask {
  /** length = width * height, 0/1 */
  data: Uint8Array;
  width: number;
  height: number;
  area: number;
  predictedIou: number;
  stabilityScore: number;
}

/**
 * Anything that can turn a point prompt into candidate masks. The ONNX
 * runner implements this for real model weights; tests substitute a
 * deterministic stub.
 */
export interface MaskPredictor {
  setImage(image: RgbImage): Promise<void>;
  predict(point: { x: number; y: number }): Promise<MaskCandidate[]>;
}

/** Parameters of one export run. */
export interface ExportRequest {
  imagePath: string;
  outputPath: string;
  /** prompt grid resolution per side, 2..8 */
  pointsPerSide: number;
  /** minimum predicted IoU, 0.6..0.8 */
  predIouThresh: number;
  /** minimum stability score, 0.6..0.8 */
  stabilityScoreThresh: number;
}

export function validateRequest(req: ExportRequest): void {
  if (!Number.isInteger(req.pointsPerSide) || req.pointsPerSide < 2 || req.pointsPerSide > 8) {
    throw new Error(`points-per-side must be an integer in [2, 8], got ${req.pointsPerSide}`);
  }
  for (const [name, value] of [
    ["pred-iou-thresh", req.predIouThresh],
    ["stability-score-thresh", req.stabilityScoreThresh],
  ] as const) {
    if (!(value >= 0.6 && value <= 0.8)) {
      throw new Error(`${name} must lie in [0.6, 0.8], got ${value}`);
    }
  }
}
