/**
 * Minimal PNG decoder for the fallback classifier.
 *
 * Supports non-interlaced grayscale, gray+alpha, RGB, and RGBA at bit depth
 * 8 or 16. Every image decodes to flat 8-bit RGB: 16-bit samples are reduced
 * with integer division by 257 and alpha is composited over black, matching
 * the conventions of the test framework that produces the images.
 */

import { inflateSync } from 'zlib';

export interface DecodedImage {
  width: number;
  height: number;
  /** Row-major RGB triples, 3 bytes per pixel. */
  pixels: Uint8Array;
}

const PNG_SIGNATURE = Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);

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

function crc32(data: Buffer): number {
  let crc = 0xffffffff;
  for (const byte of data) {
    crc = CRC_TABLE[(crc ^ byte) & 0xff] ^ (crc >>> 8);
  }
  return (crc ^ 0xffffffff) >>> 0;
}

const CHANNELS: Record<number, number> = { 0: 1, 2: 3, 4: 2, 6: 4 };

function paeth(a: number, b: number, c: number): number {
  const p = a + b - c;
  const pa = Math.abs(p - a);
  const pb = Math.abs(p - b);
  const pc = Math.abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  return pb <= pc ? b : c;
}

function unfilter(raw: Buffer, height: number, stride: number, bpp: number): Uint8Array {
  if (raw.length !== height * (stride + 1)) {
    throw new Error('decompressed pixel data has the wrong length');
  }
  const out = new Uint8Array(height * stride);
  for (let y = 0; y < height; y++) {
    const filter = raw[y * (stride + 1)];
    const rowIn = y * (stride + 1) + 1;
    const rowOut = y * stride;
    for (let i = 0; i < stride; i++) {
      const x = raw[rowIn + i];
      const left = i >= bpp ? out[rowOut + i - bpp] : 0;
      const up = y > 0 ? out[rowOut - stride + i] : 0;
      const upLeft = y > 0 && i >= bpp ? out[rowOut - stride + i - bpp] : 0;
      let value: number;
      switch (filter) {
        case 0:
          value = x;
          break;
        case 1:
          value = x + left;
          break;
        case 2:
          value = x + up;
          break;
        case 3:
          value = x + ((left + up) >> 1);
          break;
        case 4:
          value = x + paeth(left, up, upLeft);
          break;
        default:
          throw new Error(`unknown scanline filter type ${filter}`);
      }
      out[rowOut + i] = value & 0xff;
    }
  }
  return out;
}

export function decodePng(data: Buffer): DecodedImage {
  if (!data.subarray(0, 8).equals(PNG_SIGNATURE)) {
    throw new Error('not a PNG file');
  }
  let pos = 8;
  let header: { width: number; height: number; depth: number; colorType: number } | null = null;
  const idat: Buffer[] = [];
  let sawEnd = false;

  while (!sawEnd) {
    if (pos + 8 > data.length) throw new Error('file ends before IEND chunk');
    const length = data.readUInt32BE(pos);
    const type = data.subarray(pos + 4, pos + 8).toString('latin1');
    const end = pos + 8 + length;
    if (end + 4 > data.length) throw new Error('truncated chunk');
    const payload = data.subarray(pos + 8, end);
    const crc = data.readUInt32BE(end);
    if (crc32(data.subarray(pos + 4, end)) !== crc) {
      throw new Error(`CRC mismatch in ${type} chunk`);
    }
    if (type === 'IHDR') {
      if (payload.length !== 13) throw new Error('invalid IHDR');
      const width = payload.readUInt32BE(0);
      const height = payload.readUInt32BE(4);
      const depth = payload[8];
      const colorType = payload[9];
      if (width === 0 || height === 0) throw new Error('zero image dimension');
      if (payload[10] !== 0 || payload[11] !== 0) throw new Error('unknown compression or filter method');
      if (payload[12] !== 0) throw new Error('interlaced PNG is not supported');
      if (colorType === 3) throw new Error('palette PNG is not supported');
      if (!(colorType in CHANNELS)) throw new Error(`invalid color type ${colorType}`);
      if (depth !== 8 && depth !== 16) throw new Error(`bit depth ${depth} is not supported`);
      header = { width, height, depth, colorType };
    } else if (type === 'IDAT') {
      idat.push(payload);
    } else if (type === 'IEND') {
      sawEnd = true;
    }
    pos = end + 4;
  }
  if (header === null) throw new Error('missing IHDR');
  if (idat.length === 0) throw new Error('no IDAT chunk');

  let raw: Buffer;
  try {
    raw = inflateSync(Buffer.concat(idat));
  } catch (err) {
    throw new Error(`broken zlib stream: ${err}`);
  }

  const { width, height, depth, colorType } = header;
  const channels = CHANNELS[colorType];
  const sampleBytes = depth / 8;
  const stride = width * channels * sampleBytes;
  const recon = unfilter(raw, height, stride, channels * sampleBytes);

  // collapse to 8-bit samples
  const count = width * height * channels;
  const samples = new Uint8Array(count);
  if (sampleBytes === 2) {
    for (let i = 0; i < count; i++) {
      samples[i] = Math.floor(((recon[2 * i] << 8) | recon[2 * i + 1]) / 257);
    }
  } else {
    samples.set(recon);
  }

  const pixels = new Uint8Array(width * height * 3);
  for (let p = 0; p < width * height; p++) {
    let r: number, g: number, b: number;
    if (colorType === 0) {
      r = g = b = samples[p];
    } else if (colorType === 2) {
      r = samples[3 * p];
      g = samples[3 * p + 1];
      b = samples[3 * p + 2];
    } else if (colorType === 4) {
      const alpha = samples[2 * p + 1] / 255;
      r = g = b = Math.round(samples[2 * p] * alpha);
    } else {
      const alpha = samples[4 * p + 3] / 255;
      r = Math.round(samples[4 * p] * alpha);
      g = Math.round(samples[4 * p + 1] * alpha);
      b = Math.round(samples[4 * p + 2] * alpha);
    }
    pixels[3 * p] = r;
    pixels[3 * p + 1] = g;
    pixels[3 * p + 2] = b;
  }
  return { width, height, pixels };
}
