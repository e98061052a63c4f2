export { generateMasks, promptGrid, binarize, maskIou, stabilityScore } from "./amg.js";
export type { GeneratorOptions } from "./amg.js";
export { masksToLabelMap, writeLabelMap } from "./labelmap.js";
export type { LabelMap } from "./labelmap.js";
export { decodePng, decodeRgb8, encodeGray16, encodeRgb8 } from "./png.js";
export {
  buildPointFeeds, computeScale, createOnnxPredictor, preprocessImage,
  upscaleLogits, ENCODER_INPUT_SIZE, MASK_LOGIT_SIZE, RUNTIME_HELP, WEIGHTS_HELP,
} from "./sam.js";
export { runExport, main } from "./cli.js";
export { validateRequest } from "./types.js";
export type { ExportRequest, MaskCandidate, MaskPredictor, RawMask, RgbImage } from "./types.js";
