/**
 * Label-map construction and serialization.
 *
 * Wire format (shared with the painting pipeline): single-channel
 * 16-bit PNG, value 0 = unlabeled, values 1..N = segment ids, dimensions
 * equal to the source image. Overlap resolution is NOT performed here;
 * masks are rasterized in ascending-area order so later (larger) labels
 * overwrite earlier ones on contested pixels, and labels are re-indexed
 * to stay contiguous after any fully-overwritten mask drops out.
 */

import { writeFileSync } from "node:fs";

import { encodeGray16 } from "./png.js";
import type { RawMask } from "./types.js";

export interface LabelMap {
  width: number;
  height: number;
  labels: Uint16Array;
  /** number of distinct nonzero labels (contiguous 1..count) */
  count: number;
}

export function masksToLabelMap(masks: RawMask[], width: number, height: number): LabelMap {
  if (masks.length === 0) {
    throw new Error("no masks to export");
  }
  if (masks.length > 0xffff) {
    throw new Error(`too many masks for a 16-bit label map (${masks.length})`);
  }
  for (const m of masks) {
    if (m.width !== width || m.height !== height) {
      throw new Error(
        `mask is ${m.width}x${m.height} but the image is ${width}x${height}`);
    }
  }
  const ordered = [...masks].sort((a, b) => a.area - b.area);
  const labels = new Uint16Array(width * height);
  for (let i = 0; i < ordered.length; i++) {
    const mask = ordered[i].data;
    const label = i + 1;
    for (let p = 0; p < labels.length; p++) {
      if (mask[p]) labels[p] = label;
    }
  }
  // contiguous re-indexing: a mask fully overwritten by later ones
  // leaves a gap that downstream ingestion would warn about
  const present = new Set<number>();
  for (const v of labels) {
    if (v !== 0) present.add(v);
  }
  const remap = new Map<number, number>();
  let next = 1;
  for (const v of [...present].sort((a, b) => a - b)) {
    remap.set(v, next++);
  }
  for (let p = 0; p < labels.length; p++) {
    const v = labels[p];
    if (v !== 0) labels[p] = remap.get(v)!;
  }
  return { width, height, labels, count: remap.size };
}

export function writeLabelMap(map: LabelMap, path: string): void {
  writeFileSync(path, encodeGray16(map.width, map.height, map.labels));
}
