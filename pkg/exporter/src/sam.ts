/**
 * ONNX-backed mask predictor for the segment-anything family of models
 * (encoder + decoder exported separately, as in the common community
 * exports). The runtime and the weights are both optional at install
 * time; anything missing produces an actionable error instead of a
 * crash deep inside a session call.
 */

import { existsSync } from "node:fs";

import type { MaskCandidate, MaskPredictor, RgbImage } from "./types.js";

export const ENCODER_INPUT_SIZE = 1024;
export const MASK_LOGIT_SIZE = 256;

/** ImageNet-style normalization the published checkpoints expect. */
export const PIXEL_MEAN = [123.675, 116.28, 103.53];
export const PIXEL_STD = [58.395, 57.12, 57.375];

export const WEIGHTS_HELP = [
  "Model weights were not found. This exporter needs two ONNX files:",
  "  --encoder  the image encoder (e.g. vit_h image encoder export)",
  "  --decoder  the prompt decoder (mask decoder export)",
  "Community exports are available, for example:",
  "  https://huggingface.co/models?search=segment-anything+onnx",
  "or export them yourself from the official segment-anything checkpoint",
  "(sam_vit_h_4b8939.pth) with the repository's export scripts.",
].join("\n");

export const RUNTIME_HELP = [
  "The ONNX runtime is not installed. Install it next to this package:",
  "  npm install onnxruntime-node",
  "then re-run the export.",
].join("\n");

/** Long-side scale factor used for encoder preprocessing. */
export function computeScale(width: number, height: number,
                             target: number = ENCODER_INPUT_SIZE): number {
  return target / Math.max(width, height);
}

/**
 * Resize (bilinear) + pad to the encoder input and normalize to CHW.
 * Returns the tensor data plus the scaled content size inside the pad.
 */
export function preprocessImage(image: RgbImage, target: number = ENCODER_INPUT_SIZE): {
  data: Float32Array;
  scaledWidth: number;
  scaledHeight: number;
} {
  const scale = computeScale(image.width, image.height, target);
  const sw = Math.round(image.width * scale);
  const sh = Math.round(image.height * scale);
  const data = new Float32Array(3 * target * target);
  for (let y = 0; y < sh; y++) {
    const srcY = Math.min(image.height - 1, (y + 0.5) / scale - 0.5);
    const y0 = Math.max(0, Math.floor(srcY));
    const y1 = Math.min(image.height - 1, y0 + 1);
    const fy = srcY - y0;
    for (let x = 0; x < sw; x++) {
      const srcX = Math.min(image.width - 1, (x + 0.5) / scale - 0.5);
      const x0 = Math.max(0, Math.floor(srcX));
      const x1 = Math.min(image.width - 1, x0 + 1);
      const fx = srcX - x0;
      for (let c = 0; c < 3; c++) {
        const v00 = image.data[(y0 * image.width + x0) * 3 + c];
        const v01 = image.data[(y0 * image.width + x1) * 3 + c];
        const v10 = image.data[(y1 * image.width + x0) * 3 + c];
        const v11 = image.data[(y1 * image.width + x1) * 3 + c];
        const top = v00 + (v01 - v00) * fx;
        const bottom = v10 + (v11 - v10) * fx;
        const value = top + (bottom - top) * fy;
        data[c * target * target + y * target + x] = (value - PIXEL_MEAN[c]) / PIXEL_STD[c];
      }
    }
  }
  return { data, scaledWidth: sw, scaledHeight: sh };
}

/**
 * Point-prompt tensors: the click plus the required padding point with
 * label -1, coordinates in encoder (scaled) space.
 */
export function buildPointFeeds(point: { x: number; y: number }, scale: number): {
  pointCoords: Float32Array;
  pointLabels: Float32Array;
  dims: { coords: number[]; labels: number[] };
} {
  const pointCoords = new Float32Array([point.x * scale, point.y * scale, 0, 0]);
  const pointLabels = new Float32Array([1, -1]);
  return {
    pointCoords,
    pointLabels,
    dims: { coords: [1, 2, 2], labels: [1, 2] },
  };
}

/**
 * Bilinear upscale of one low-resolution logit window to the original
 * image size, honoring the padded encoder layout (content occupies the
 * top-left scaledW x scaledH portion of the square input).
 */
export function upscaleLogits(logits: Float32Array, size: number,
                              scaledWidth: number, scaledHeight: number,
                              outWidth: number, outHeight: number): Float32Array {
  const contentW = (scaledWidth / ENCODER_INPUT_SIZE) * size;
  const contentH = (scaledHeight / ENCODER_INPUT_SIZE) * size;
  const out = new Float32Array(outWidth * outHeight);
  for (let y = 0; y < outHeight; y++) {
    const sy = Math.min(contentH - 1, ((y + 0.5) / outHeight) * contentH - 0.5);
    const y0 = Math.max(0, Math.floor(sy));
    const y1 = Math.min(size - 1, y0 + 1);
    const fy = sy - y0;
    for (let x = 0; x < outWidth; x++) {
      const sx = Math.min(contentW - 1, ((x + 0.5) / outWidth) * contentW - 0.5);
      const x0 = Math.max(0, Math.floor(sx));
      const x1 = Math.min(size - 1, x0 + 1);
      const fx = sx - x0;
      const v00 = logits[y0 * size + x0];
      const v01 = logits[y0 * size + x1];
      const v10 = logits[y1 * size + x0];
      const v11 = logits[y1 * size + x1];
      const top = v00 + (v01 - v00) * fx;
      const bottom = v10 + (v11 - v10) * fx;
      out[y * outWidth + x] = top + (bottom - top) * fy;
    }
  }
  return out;
}

export interface OnnxPredictorOptions {
  encoderPath: string;
  decoderPath: string;
}

/**
 * Create the ONNX predictor, verifying runtime and weights up front.
 */
export async function createOnnxPredictor(options: OnnxPredictorOptions): Promise<MaskPredictor> {
  for (const path of [options.encoderPath, options.decoderPath]) {
    if (!path || !existsSync(path)) {
      throw new Error(`${WEIGHTS_HELP}\nMissing file: ${path || "(not given)"}`);
    }
  }
  const moduleName = "onnxruntime-node";
  let ort: any;
  try {
    ort = await import(moduleName);
  } catch {
    throw new Error(RUNTIME_HELP);
  }
  const encoder = await ort.InferenceSession.create(options.encoderPath);
  const decoder = await ort.InferenceSession.create(options.decoderPath);

  let embedding: any = null;
  let imageSize = { width: 0, height: 0 };
  let scaled = { width: 0, height: 0 };

  return {
    async setImage(image: RgbImage): Promise<void> {
      const pre = preprocessImage(image);
      imageSize = { width: image.width, height: image.height };
      scaled = { width: pre.scaledWidth, height: pre.scaledHeight };
      const input = new ort.Tensor("float32", pre.data,
                                   [1, 3, ENCODER_INPUT_SIZE, ENCODER_INPUT_SIZE]);
      const outputs = await encoder.run({ [encoder.inputNames[0]]: input });
      embedding = outputs[encoder.outputNames[0]];
    },

    async predict(point: { x: number; y: number }): Promise<MaskCandidate[]> {
      if (embedding === null) {
        throw new Error("setImage must be called before predict");
      }
      const scale = computeScale(imageSize.width, imageSize.height);
      const feeds = buildPointFeeds(point, scale);
      const inputs: Record<string, any> = {
        image_embeddings: embedding,
        point_coords: new ort.Tensor("float32", feeds.pointCoords, feeds.dims.coords),
        point_labels: new ort.Tensor("float32", feeds.pointLabels, feeds.dims.labels),
        mask_input: new ort.Tensor(
          "float32", new Float32Array(MASK_LOGIT_SIZE * MASK_LOGIT_SIZE),
          [1, 1, MASK_LOGIT_SIZE, MASK_LOGIT_SIZE]),
        has_mask_input: new ort.Tensor("float32", new Float32Array([0]), [1]),
        orig_im_size: new ort.Tensor(
          "float32", new Float32Array([imageSize.height, imageSize.width]), [2]),
      };
      const outputs = await decoder.run(inputs);
      const masks = outputs["masks"] ?? outputs[decoder.outputNames[0]];
      const scores = outputs["iou_predictions"] ?? outputs[decoder.outputNames[1]];
      const [, count, mh, mw] = masks.dims;
      const per = mh * mw;
      const candidates: MaskCandidate[] = [];
      for (let k = 0; k < count; k++) {
        const window = (masks.data as Float32Array).subarray(k * per, (k + 1) * per);
        let logits: Float32Array;
        if (mh === imageSize.height && mw === imageSize.width) {
          logits = Float32Array.from(window);
        } else {
          // low-resolution export: upscale from the padded layout
          logits = upscaleLogits(window, mh, scaled.width, scaled.height,
                                 imageSize.width, imageSize.height);
        }
        candidates.push({
          logits,
          width: imageSize.width,
          height: imageSize.height,
          predictedIou: Number((scores.data as Float32Array)[k]),
        });
      }
      return candidates;
    },
  };
}
