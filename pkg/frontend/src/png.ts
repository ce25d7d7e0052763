import { deflateSync } from "zlib";

/** Minimal RGBA raster with a PNG encoder (8-bit, no interlace, filter 0). */
export class Raster {
  readonly width: number;
  readonly height: number;
  readonly data: Uint8Array;

  constructor(width: number, height: number, fill: [number, number, number] = [255, 255, 255]) {
    this.width = width;
    this.height = height;
    this.data = new Uint8Array(width * height * 4);
    for (let i = 0; i < width * height; i++) {
      this.data[4 * i] = fill[0];
      this.data[4 * i + 1] = fill[1];
      this.data[4 * i + 2] = fill[2];
      this.data[4 * i + 3] = 255;
    }
  }

  set(x: number, y: number, rgb: [number, number, number], alpha = 1): void {
    x = Math.round(x);
    y = Math.round(y);
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const i = 4 * (y * this.width + x);
    this.data[i] = Math.round(rgb[0] * alpha + this.data[i] * (1 - alpha));
    this.data[i + 1] = Math.round(rgb[1] * alpha + this.data[i + 1] * (1 - alpha));
    this.data[i + 2] = Math.round(rgb[2] * alpha + this.data[i + 2] * (1 - alpha));
  }

  fillRect(x0: number, y0: number, x1: number, y1: number,
           rgb: [number, number, number], alpha = 1): void {
    for (let y = Math.max(0, Math.floor(y0)); y <= Math.min(this.height - 1, Math.ceil(y1)); y++) {
      for (let x = Math.max(0, Math.floor(x0)); x <= Math.min(this.width - 1, Math.ceil(x1)); x++) {
        this.set(x, y, rgb, alpha);
      }
    }
  }

  line(x0: number, y0: number, x1: number, y1: number,
       rgb: [number, number, number], thickness = 1): void {
    const steps = Math.max(1, Math.ceil(Math.max(Math.abs(x1 - x0), Math.abs(y1 - y0))) * 2);
    for (let s = 0; s <= steps; s++) {
      const t = s / steps;
      const x = x0 + (x1 - x0) * t;
      const y = y0 + (y1 - y0) * t;
      for (let dy = 0; dy < thickness; dy++) {
        for (let dx = 0; dx < thickness; dx++) {
          this.set(x + dx - (thickness - 1) / 2, y + dy - (thickness - 1) / 2, rgb);
        }
      }
    }
  }
}

function crc32(buf: Uint8Array): number {
  let crc = 0xffffffff;
  for (let i = 0; i < buf.length; i++) {
    crc ^= buf[i];
    for (let k = 0; k < 8; k++) {
      crc = (crc >>> 1) ^ (0xedb88320 & -(crc & 1));
    }
  }
  return (crc ^ 0xffffffff) >>> 0;
}

function chunk(type: string, body: Uint8Array): Buffer {
  const head = Buffer.alloc(8);
  head.writeUInt32BE(body.length, 0);
  head.write(type, 4, "ascii");
  const crcBuf = Buffer.alloc(4);
  const typed = Buffer.concat([Buffer.from(type, "ascii"), Buffer.from(body)]);
  crcBuf.writeUInt32BE(crc32(typed), 0);
  return Buffer.concat([head, Buffer.from(body), crcBuf]);
}

export function encodePNG(raster: Raster): Buffer {
  const { width, height, data } = raster;
  const ihdr = Buffer.alloc(13);
  ihdr.writeUInt32BE(width, 0);
  ihdr.writeUInt32BE(height, 4);
  ihdr[8] = 8; // bit depth
  ihdr[9] = 6; // color type RGBA
  // compression, filter, interlace stay 0
  const scanlines = Buffer.alloc(height * (1 + width * 4));
  for (let y = 0; y < height; y++) {
    const rowStart = y * (1 + width * 4);
    scanlines[rowStart] = 0; // filter type none
    data
      .subarray(y * width * 4, (y + 1) * width * 4)
      .forEach((v, i) => (scanlines[rowStart + 1 + i] = v));
  }
  return Buffer.concat([
    Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]),
    chunk("IHDR", ihdr),
    chunk("IDAT", deflateSync(scanlines)),
    chunk("IEND", new Uint8Array(0)),
  ]);
}
