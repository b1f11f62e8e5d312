/** Crop and quarter-turn orientation on raw RGBA pixel buffers.
 *
 * Operating on bytes (rather than a canvas) keeps the exact pixels that will
 * be uploaded verifiable in tests. Only quarter turns are offered: the
 * matcher assumes upright scales and free rotation would silently break it.
 */

import { PNG } from "pngjs";

export interface RgbaImage {
  width: number;
  height: number;
  /** RGBA, row-major, 4 bytes per pixel. */
  data: Uint8Array;
}

export interface CropRect {
  x: number;
  y: number;
  width: number;
  height: number;
}

export function decodePng(bytes: Uint8Array): RgbaImage {
  const png = PNG.sync.read(Buffer.from(bytes));
  return {
    width: png.width,
    height: png.height,
    data: new Uint8Array(png.data),
  };
}

export function encodePng(image: RgbaImage): Uint8Array {
  const png = new PNG({ width: image.width, height: image.height });
  png.data = Buffer.from(image.data);
  return new Uint8Array(PNG.sync.write(png));
}

export function validateRect(image: RgbaImage, rect: CropRect): void {
  const intGiven = [rect.x, rect.y, rect.width, rect.height].every(
    Number.isInteger,
  );
  if (!intGiven) {
    throw new Error("crop rectangle must have integer pixel coordinates");
  }
  if (rect.width < 1 || rect.height < 1) {
    throw new Error("crop rectangle is degenerate");
  }
  if (
    rect.x < 0 ||
    rect.y < 0 ||
    rect.x + rect.width > image.width ||
    rect.y + rect.height > image.height
  ) {
    throw new Error("crop rectangle exceeds image bounds");
  }
}

export function cropRect(image: RgbaImage, rect: CropRect): RgbaImage {
  validateRect(image, rect);
  const out = new Uint8Array(rect.width * rect.height * 4);
  for (let row = 0; row < rect.height; row++) {
    const src = ((rect.y + row) * image.width + rect.x) * 4;
    out.set(image.data.subarray(src, src + rect.width * 4), row * rect.width * 4);
  }
  return { width: rect.width, height: rect.height, data: out };
}

/** Rotate clockwise by `turns` quarter turns (any integer, negative = CCW). */
export function rotateQuarter(image: RgbaImage, turns: number): RgbaImage {
  if (!Number.isInteger(turns)) {
    throw new Error("turns must be an integer number of quarter turns");
  }
  const k = ((turns % 4) + 4) % 4;
  if (k === 0) {
    return { ...image, data: image.data.slice() };
  }
  const { width, height } = image;
  const swap = k % 2 === 1;
  const outWidth = swap ? height : width;
  const outHeight = swap ? width : height;
  const out = new Uint8Array(image.data.length);
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      let nx: number;
      let ny: number;
      if (k === 1) {
        nx = height - 1 - y;
        ny = x;
      } else if (k === 2) {
        nx = width - 1 - x;
        ny = height - 1 - y;
      } else {
        nx = y;
        ny = width - 1 - x;
      }
      const src = (y * width + x) * 4;
      const dst = (ny * outWidth + nx) * 4;
      out[dst] = image.data[src]!;
      out[dst + 1] = image.data[src + 1]!;
      out[dst + 2] = image.data[src + 2]!;
      out[dst + 3] = image.data[src + 3]!;
    }
  }
  return { width: outWidth, height: outHeight, data: out };
}

/** The crop-and-orient step: user rectangle first, then quarter turns. */
export function cropAndOrient(
  image: RgbaImage,
  rect: CropRect,
  turns: number,
): RgbaImage {
  return rotateQuarter(cropRect(image, rect), turns);
}
