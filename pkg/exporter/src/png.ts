/**
 * Minimal PNG codec: just enough for the exporter's needs.
 *
 * Encoding: 16-bit grayscale (the label-map wire format) and 8-bit RGB
 * (test fixtures). Decoding: non-interlaced gray 8/16-bit, RGB and RGBA
 * 8-bit, with all five scanline filters.
 */

import { deflateSync, inflateSync } from "node:zlib";

const SIGNATURE = Uint8Array.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);

const CRC_TABLE = (() => {
  const table = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) {
      c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    }
    table[n] = c >>> 0;
  }
  return table;
})();

function crc32(...parts: Uint8Array[]): number {
  let c = 0xffffffff;
  for (const part of parts) {
    for (let i = 0; i < part.length; i++) {
      c = CRC_TABLE[(c ^ part[i]) & 0xff] ^ (c >>> 8);
    }
  }
  return (c ^ 0xffffffff) >>> 0;
}

function chunk(type: string, data: Uint8Array): Buffer {
  const head = Buffer.alloc(8);
  head.writeUInt32BE(data.length, 0);
  head.write(type, 4, "latin1");
  const crc = Buffer.alloc(4);
  crc.writeUInt32BE(crc32(head.subarray(4), data), 0);
  return Buffer.concat([head, data, crc]);
}

function ihdr(width: number, height: number, bitDepth: number, colorType: number): Buffer {
  const data = Buffer.alloc(13);
  data.writeUInt32BE(width, 0);
  data.writeUInt32BE(height, 4);
  data[8] = bitDepth;
  data[9] = colorType;
  // compression, filter, interlace all zero
  return chunk("IHDR", data);
}

/** Encode a 16-bit single-channel raster (big-endian samples). */
export function encodeGray16(width: number, height: number, pixels: Uint16Array): Buffer {
  if (pixels.length !== width * height) {
    throw new Error(`pixel count ${pixels.length} does not match ${width}x${height}`);
  }
  const stride = width * 2;
  const raw = Buffer.alloc(height * (stride + 1));
  for (let y = 0; y < height; y++) {
    const row = y * (stride + 1);
    raw[row] = 0; // filter: none
    for (let x = 0; x < width; x++) {
      raw.writeUInt16BE(pixels[y * width + x], row + 1 + x * 2);
    }
  }
  return Buffer.concat([
    Buffer.from(SIGNATURE),
    ihdr(width, height, 16, 0),
    chunk("IDAT", deflateSync(raw)),
    chunk("IEND", Buffer.alloc(0)),
  ]);
}

/** Encode an 8-bit RGB raster (HWC, length = w*h*3). */
export function encodeRgb8(width: number, height: number, pixels: Uint8Array): Buffer {
  if (pixels.length !== width * height * 3) {
    throw new Error(`pixel count ${pixels.length} does not match ${width}x${height}x3`);
  }
  const stride = width * 3;
  const raw = Buffer.alloc(height * (stride + 1));
  for (let y = 0; y < height; y++) {
    const row = y * (stride + 1);
    raw[row] = 0;
    raw.set(pixels.subarray(y * stride, (y + 1) * stride), row + 1);
  }
  return Buffer.concat([
    Buffer.from(SIGNATURE),
    ihdr(width, height, 8, 2),
    chunk("IDAT", deflateSync(raw)),
    chunk("IEND", Buffer.alloc(0)),
  ]);
}

export interface DecodedPng {
  width: number;
  height: number;
  bitDepth: 8 | 16;
  /** samples per pixel: 1 (gray), 3 (RGB) or 4 (RGBA) */
  channels: 1 | 3 | 4;
  /** row-major interleaved samples; Uint16Array when bitDepth is 16 */
  pixels: Uint8Array | Uint16Array;
}

function paeth(a: number, b: number, c: number): number {
  const p = a + b - c;
  const pa = Math.abs(p - a);
  const pb = Math.abs(p - b);
  const pc = Math.abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

export function decodePng(buffer: Uint8Array): DecodedPng {
  for (let i = 0; i < 8; i++) {
    if (buffer[i] !== SIGNATURE[i]) throw new Error("not a PNG file");
  }
  const view = Buffer.from(buffer.buffer, buffer.byteOffset, buffer.byteLength);
  let offset = 8;
  let width = 0;
  let height = 0;
  let bitDepth = 0;
  let colorType = 0;
  const idat: Buffer[] = [];
  while (offset < view.length) {
    const length = view.readUInt32BE(offset);
    const type = view.toString("latin1", offset + 4, offset + 8);
    const data = view.subarray(offset + 8, offset + 8 + length);
    if (type === "IHDR") {
      width = data.readUInt32BE(0);
      height = data.readUInt32BE(4);
      bitDepth = data[8];
      colorType = data[9];
      if (data[12] !== 0) throw new Error("interlaced PNG is not supported");
    } else if (type === "IDAT") {
      idat.push(Buffer.from(data));
    } else if (type === "IEND") {
      break;
    }
    offset += 12 + length;
  }
  const channelsByColor: Record<number, 1 | 3 | 4> = { 0: 1, 2: 3, 6: 4 };
  const channels = channelsByColor[colorType];
  if (channels === undefined) throw new Error(`unsupported PNG color type ${colorType}`);
  if (bitDepth !== 8 && bitDepth !== 16) throw new Error(`unsupported bit depth ${bitDepth}`);
  if (bitDepth === 16 && channels !== 1) throw new Error("16-bit PNG support is grayscale-only");

  const raw = inflateSync(Buffer.concat(idat));
  const sampleBytes = bitDepth / 8;
  const bpp = channels * sampleBytes;
  const stride = width * bpp;
  const out = Buffer.alloc(height * stride);
  for (let y = 0; y < height; y++) {
    const filter = raw[y * (stride + 1)];
    const src = raw.subarray(y * (stride + 1) + 1, (y + 1) * (stride + 1));
    const cur = out.subarray(y * stride, (y + 1) * stride);
    const prev = y > 0 ? out.subarray((y - 1) * stride, y * stride) : null;
    for (let x = 0; x < stride; x++) {
      const a = x >= bpp ? cur[x - bpp] : 0;
      const b = prev ? prev[x] : 0;
      const c = prev && x >= bpp ? prev[x - bpp] : 0;
      let value = src[x];
      switch (filter) {
        case 0: break;
        case 1: value = (value + a) & 0xff; break;
        case 2: value = (value + b) & 0xff; break;
        case 3: value = (value + ((a + b) >> 1)) & 0xff; break;
        case 4: value = (value + paeth(a, b, c)) & 0xff; break;
        default: throw new Error(`unknown PNG filter ${filter}`);
      }
      cur[x] = value;
    }
  }
  if (bitDepth === 16) {
    const pixels = new Uint16Array(width * height);
    for (let i = 0; i < pixels.length; i++) {
      pixels[i] = out.readUInt16BE(i * 2);
    }
    return { width, height, bitDepth: 16, channels: 1, pixels };
  }
  return { width, height, bitDepth: 8, channels, pixels: new Uint8Array(out) };
}

/** Decode a PNG into 8-bit RGB, collapsing gray and dropping alpha. */
export function decodeRgb8(buffer: Uint8Array): { width: number; height: number; data: Uint8Array } {
  const png = decodePng(buffer);
  const n = png.width * png.height;
  const data = new Uint8Array(n * 3);
  for (let i = 0; i < n; i++) {
    let r: number;
    let g: number;
    let b: number;
    if (png.channels === 1) {
      const v = png.bitDepth === 16 ? (png.pixels[i] >> 8) : png.pixels[i];
      r = g = b = v;
    } else {
      r = png.pixels[i * png.channels];
      g = png.pixels[i * png.channels + 1];
      b = png.pixels[i * png.channels + 2];
    }
    data[i * 3] = r;
    data[i * 3 + 1] = g;
    data[i * 3 + 2] = b;
  }
  return { width: png.width, height: png.height, data };
}
