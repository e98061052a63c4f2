#!/usr/bin/env node
/**
 * Export a label map for an image using a pretrained automatic mask
 * generator, in the painting pipeline's ingestion format (16-bit
 * single-channel PNG, 0 = unlabeled, labels contiguous from 1).
 */

import { readFileSync } from "node:fs";

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { generateMasks } from "./amg.js";
import { masksToLabelMap, writeLabelMap } from "./labelmap.js";
import { decodeRgb8 } from "./png.js";
import { createOnnxPredictor } from "./sam.js";
import { validateRequest, type ExportRequest } from "./types.js";

export async function runExport(req: ExportRequest & {
  encoder: string;
  decoder: string;
}): Promise<{ maskCount: number; labelCount: number }> {
  validateRequest(req);
  let buffer: Uint8Array;
  try {
    buffer = readFileSync(req.imagePath);
  } catch {
    throw new Error(`cannot read image: ${req.imagePath}`);
  }
  const image = (() => {
    const { width, height, data } = decodeRgb8(buffer);
    return { width, height, data };
  })();
  const predictor = await createOnnxPredictor({
    encoderPath: req.encoder,
    decoderPath: req.decoder,
  });
  const masks = await generateMasks(predictor, image, {
    pointsPerSide: req.pointsPerSide,
    predIouThresh: req.predIouThresh,
    stabilityScoreThresh: req.stabilityScoreThresh,
  });
  if (masks.length === 0) {
    throw new Error("the generator produced no masks above the thresholds");
  }
  const map = masksToLabelMap(masks, image.width, image.height);
  writeLabelMap(map, req.outputPath);
  return { maskCount: masks.length, labelCount: map.count };
}

export async function main(argv: string[]): Promise<number> {
  const args = await yargs(argv)
    .scriptName("sam-labelmap-export")
    .option("image", { type: "string", demandOption: true, describe: "input image (PNG)" })
    .option("output", { type: "string", demandOption: true, describe: "output label-map PNG" })
    .option("points-per-side", {
      type: "number", default: 4,
      describe: "prompt grid resolution per side (2-8)",
    })
    .option("pred-iou-thresh", {
      type: "number", default: 0.7,
      describe: "minimum predicted IoU (0.6-0.8)",
    })
    .option("stability-score-thresh", {
      type: "number", default: 0.7,
      describe: "minimum stability score (0.6-0.8)",
    })
    .option("encoder", { type: "string", default: "", describe: "image-encoder ONNX file" })
    .option("decoder", { type: "string", default: "", describe: "mask-decoder ONNX file" })
    .strict()
    .help()
    .parse();

  try {
    const result = await runExport({
      imagePath: args.image,
      outputPath: args.output,
      pointsPerSide: args["points-per-side"],
      predIouThresh: args["pred-iou-thresh"],
      stabilityScoreThresh: args["stability-score-thresh"],
      encoder: args.encoder,
      decoder: args.decoder,
    });
    console.log(
      `wrote ${args.output}: ${result.labelCount} labels from ${result.maskCount} masks`);
    return 0;
  } catch (error) {
    console.error(`error: ${error instanceof Error ? error.message : error}`);
    return 1;
  }
}

const invokedDirectly = process.argv[1] !== undefined
  && import.meta.url.endsWith(process.argv[1].split("/").pop() ?? "");
if (invokedDirectly) {
  main(hideBin(process.argv)).then((code) => {
    process.exitCode = code;
  });
}
