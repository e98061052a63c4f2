import { deflateSync } from "node:zlib";
import { describe, expect, it } from "vitest";

import { decodePng, decodeRgb8, encodeGray16, encodeRgb8 } from "../src/png.js";

describe("png codec", () => {
  it("round-trips 16-bit grayscale", () => {
    const w = 7;
    const h = 5;
    const pixels = new Uint16Array(w * h);
    for (let i = 0; i < pixels.length; i++) pixels[i] = (i * 9973) % 65536;
    const png = decodePng(encodeGray16(w, h, pixels));
    expect(png.width).toBe(w);
    expect(png.height).toBe(h);
    expect(png.bitDepth).toBe(16);
    expect(png.channels).toBe(1);
    expect(Array.from(png.pixels)).toEqual(Array.from(pixels));
  });

  it("round-trips 8-bit RGB", () => {
    const w = 4;
    const h = 3;
    const pixels = new Uint8Array(w * h * 3);
    for (let i = 0; i < pixels.length; i++) pixels[i] = (i * 37) % 256;
    const rgb = decodeRgb8(encodeRgb8(w, h, pixels));
    expect(rgb.width).toBe(w);
    expect(Array.from(rgb.data)).toEqual(Array.from(pixels));
  });

  it("rejects wrong pixel counts", () => {
    expect(() => encodeGray16(2, 2, new Uint16Array(3))).toThrow(/pixel count/);
    expect(() => encodeRgb8(2, 2, new Uint8Array(5))).toThrow(/pixel count/);
  });

  it("rejects non-PNG data", () => {
    expect(() => decodePng(new Uint8Array([1, 2, 3, 4, 5, 6, 7, 8, 9]))).toThrow(/not a PNG/);
  });

  it("decodes every scanline filter type", () => {
    // hand-build a 3x4 RGB PNG using filters 0..4 on successive rows
    const w = 3;
    const h = 4;
    const rows: number[][] = [
      [10, 20, 30, 40, 50, 60, 70, 80, 90],
      [15, 25, 35, 45, 55, 65, 75, 85, 95],
      [12, 22, 32, 42, 52, 62, 72, 82, 92],
      [99, 88, 77, 66, 55, 44, 33, 22, 11],
    ];
    const bpp = 3;
    const filtered: number[] = [];
    const paeth = (a: number, b: number, c: number) => {
      const p = a + b - c;
      const pa = Math.abs(p - a);
      const pb = Math.abs(p - b);
      const pc = Math.abs(p - c);
      if (pa <= pb && pa <= pc) return a;
      if (pb <= pc) return b;
      return c;
    };
    rows.forEach((row, y) => {
      const filter = y % 5;
      filtered.push(filter === 4 && y === 3 ? 4 : filter);
      const prev = y > 0 ? rows[y - 1] : null;
      row.forEach((value, x) => {
        const a = x >= bpp ? row[x - bpp] : 0;
        const b = prev ? prev[x] : 0;
        const c = prev && x >= bpp ? prev[x - bpp] : 0;
        let enc = value;
        if (filter === 1) enc = (value - a + 256) & 0xff;
        else if (filter === 2) enc = (value - b + 256) & 0xff;
        else if (filter === 3) enc = (value - ((a + b) >> 1) + 256) & 0xff;
        else if (filter === 4) enc = (value - paeth(a, b, c) + 256) & 0xff;
        filtered.push(enc);
      });
    });
    // splice the hand-filtered stream into a valid container by reusing
    // the encoder's header and trailer
    const template = encodeRgb8(w, h, new Uint8Array(w * h * 3));
    const sig = template.subarray(0, 8);
    const ihdrChunk = template.subarray(8, 8 + 25);
    const idatData = deflateSync(Buffer.from(filtered));
    const crcTable = new Uint32Array(256);
    for (let n = 0; n < 256; n++) {
      let c = n;
      for (let k = 0; k < 8; k++) c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
      crcTable[n] = c >>> 0;
    }
    const crc32 = (bytes: Uint8Array) => {
      let c = 0xffffffff;
      for (const byte of bytes) c = crcTable[(c ^ byte) & 0xff] ^ (c >>> 8);
      return (c ^ 0xffffffff) >>> 0;
    };
    const idat = Buffer.alloc(12 + idatData.length);
    idat.writeUInt32BE(idatData.length, 0);
    idat.write("IDAT", 4, "latin1");
    idatData.copy(idat, 8);
    idat.writeUInt32BE(crc32(idat.subarray(4, 8 + idatData.length)), 8 + idatData.length);
    const iend = template.subarray(template.length - 12);
    const png = decodePng(Buffer.concat([sig, ihdrChunk, idat, iend]));
    expect(Array.from(png.pixels)).toEqual(rows.flat());
  });

  it("collapses grayscale to RGB on decodeRgb8", () => {
    const pixels = new Uint16Array([0, 65535, 32768, 256]);
    const rgb = decodeRgb8(encodeGray16(2, 2, pixels));
    expect(Array.from(rgb.data.subarray(0, 6))).toEqual([0, 0, 0, 255, 255, 255]);
  });
});
