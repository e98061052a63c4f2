import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it, vi } from "vitest";

import { main, runExport } from "../src/cli.js";
import { encodeRgb8 } from "../src/png.js";
import { validateRequest } from "../src/types.js";
import { stripeImage } from "./stub.js";

function writeTestImage(): string {
  const dir = mkdtempSync(join(tmpdir(), "cli-"));
  const image = stripeImage(16, 12);
  const path = join(dir, "img.png");
  writeFileSync(path, encodeRgb8(image.width, image.height, image.data));
  return path;
}

describe("request validation", () => {
  const base = {
    imagePath: "x.png", outputPath: "y.png",
    pointsPerSide: 4, predIouThresh: 0.7, stabilityScoreThresh: 0.7,
  };

  it("accepts in-range parameters", () => {
    validateRequest(base);
    validateRequest({ ...base, pointsPerSide: 2, predIouThresh: 0.6, stabilityScoreThresh: 0.8 });
  });

  it("rejects out-of-range parameters", () => {
    expect(() => validateRequest({ ...base, pointsPerSide: 1 })).toThrow(/\[2, 8\]/);
    expect(() => validateRequest({ ...base, pointsPerSide: 9 })).toThrow(/\[2, 8\]/);
    expect(() => validateRequest({ ...base, predIouThresh: 0.5 })).toThrow(/0.6, 0.8/);
    expect(() => validateRequest({ ...base, stabilityScoreThresh: 0.9 })).toThrow(/0.6, 0.8/);
  });
});

describe("runExport failure modes", () => {
  it("reports an unreadable image", async () => {
    await expect(runExport({
      imagePath: "/no/such/image.png", outputPath: "/tmp/out.png",
      pointsPerSide: 4, predIouThresh: 0.7, stabilityScoreThresh: 0.7,
      encoder: "", decoder: "",
    })).rejects.toThrow(/cannot read image/);
  });

  it("reports missing weights with instructions", async () => {
    const imagePath = writeTestImage();
    await expect(runExport({
      imagePath, outputPath: join(imagePath, "..", "out.png"),
      pointsPerSide: 4, predIouThresh: 0.7, stabilityScoreThresh: 0.7,
      encoder: "/no/enc.onnx", decoder: "/no/dec.onnx",
    })).rejects.toThrow(/weights were not found/i);
  });
});

describe("cli entry", () => {
  it("exits nonzero and prints the failure", async () => {
    const imagePath = writeTestImage();
    const errors: string[] = [];
    const spy = vi.spyOn(console, "error").mockImplementation((msg: string) => {
      errors.push(String(msg));
    });
    const code = await main([
      "--image", imagePath, "--output", "/tmp/out.png",
      "--points-per-side", "4",
    ]);
    spy.mockRestore();
    expect(code).toBe(1);
    expect(errors.join("\n")).toMatch(/weights were not found/i);
  });

  it("rejects out-of-range flags", async () => {
    const imagePath = writeTestImage();
    const spy = vi.spyOn(console, "error").mockImplementation(() => {});
    const code = await main([
      "--image", imagePath, "--output", "/tmp/out.png",
      "--points-per-side", "12",
    ]);
    spy.mockRestore();
    expect(code).toBe(1);
  });
});
