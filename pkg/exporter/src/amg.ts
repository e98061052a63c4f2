/**
 * Automatic mask generation over a point-prompt grid.
 *
 * For every grid point the predictor proposes candidate masks; each is
 * binarized at logit 0, scored for stability (agreement between the
 * masks cut at +offset and -offset), filtered by the predicted-IoU and
 * stability thresholds, and finally deduplicated by greedy mask-IoU
 * suppression, best predicted IoU first.
 */

import type { MaskCandidate, MaskPredictor, RawMask, RgbImage } from "./types.js";

export interface GeneratorOptions {
  pointsPerSide: number;
  predIouThresh: number;
  stabilityScoreThresh: number;
  /** logit offset used by the stability score (model convention: 1.0) */
  stabilityOffset?: number;
  /** masks with IoU above this against a kept mask are dropped */
  dedupeIouThresh?: number;
  /** drop masks smaller than this many pixels */
  minMaskArea?: number;
}

/** Evenly spaced prompt grid in pixel coordinates (cell centers). */
export function promptGrid(width: number, height: number, pointsPerSide: number):
    { x: number; y: number }[] {
  const points: { x: number; y: number }[] = [];
  for (let j = 0; j < pointsPerSide; j++) {
    for (let i = 0; i < pointsPerSide; i++) {
      points.push({
        x: ((i + 0.5) / pointsPerSide) * width,
        y: ((j + 0.5) / pointsPerSide) * height,
      });
    }
  }
  return points;
}

export function binarize(logits: Float32Array, threshold: number): Uint8Array {
  const out = new Uint8Array(logits.length);
  for (let i = 0; i < logits.length; i++) {
    out[i] = logits[i] > threshold ? 1 : 0;
  }
  return out;
}

export function maskIou(a: Uint8Array, b: Uint8Array): number {
  let inter = 0;
  let union = 0;
  for (let i = 0; i < a.length; i++) {
    const av = a[i] !== 0;
    const bv = b[i] !== 0;
    if (av && bv) inter++;
    if (av || bv) union++;
  }
  return union === 0 ? 0 : inter / union;
}

/**
 * Stability of a thresholded mask: IoU between the binarizations at
 * +offset and -offset. Confident (peaky) logits barely change, noisy
 * ones collapse.
 */
export function stabilityScore(logits: Float32Array, offset: number): number {
  let high = 0;
  let low = 0;
  for (let i = 0; i < logits.length; i++) {
    if (logits[i] > offset) high++;
    if (logits[i] > -offset) low++;
  }
  return low === 0 ? 0 : high / low;
}

function candidateToMask(candidate: MaskCandidate, offset: number): RawMask | null {
  const data = binarize(candidate.logits, 0);
  let area = 0;
  for (let i = 0; i < data.length; i++) area += data[i];
  if (area === 0) return null;
  return {
    data,
    width: candidate.width,
    height: candidate.height,
    area,
    predictedIou: candidate.predictedIou,
    stabilityScore: stabilityScore(candidate.logits, offset),
  };
}

export async function generateMasks(predictor: MaskPredictor, image: RgbImage,
                                    options: GeneratorOptions): Promise<RawMask[]> {
  const offset = options.stabilityOffset ?? 1.0;
  const dedupe = options.dedupeIouThresh ?? 0.7;
  const minArea = options.minMaskArea ?? 1;
  await predictor.setImage(image);
  const accepted: RawMask[] = [];
  for (const point of promptGrid(image.width, image.height, options.pointsPerSide)) {
    for (const candidate of await predictor.predict(point)) {
      if (candidate.predictedIou < options.predIouThresh) continue;
      const mask = candidateToMask(candidate, offset);
      if (mask === null || mask.area < minArea) continue;
      if (mask.stabilityScore < options.stabilityScoreThresh) continue;
      accepted.push(mask);
    }
  }
  // greedy non-maximum suppression on mask IoU, best first
  accepted.sort((a, b) => b.predictedIou - a.predictedIou || b.area - a.area);
  const kept: RawMask[] = [];
  for (const mask of accepted) {
    let duplicate = false;
    for (const other of kept) {
      if (maskIou(mask.data, other.data) > dedupe) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) kept.push(mask);
  }
  return kept;
}
