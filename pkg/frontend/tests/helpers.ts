import { RgbaImage, encodePng } from "../src/crop.js";

export function solidImage(
  width: number,
  height: number,
  rgb: [number, number, number],
): RgbaImage {
  const data = new Uint8Array(width * height * 4);
  for (let i = 0; i < width * height; i++) {
    data[i * 4] = rgb[0];
    data[i * 4 + 1] = rgb[1];
    data[i * 4 + 2] = rgb[2];
    data[i * 4 + 3] = 255;
  }
  return { width, height, data };
}

export function paintDisk(
  image: RgbaImage,
  cx: number,
  cy: number,
  radius: number,
  rgb: [number, number, number],
): void {
  for (let y = 0; y < image.height; y++) {
    for (let x = 0; x < image.width; x++) {
      if ((x - cx) ** 2 + (y - cy) ** 2 <= radius ** 2) {
        const i = (y * image.width + x) * 4;
        image.data[i] = rgb[0];
        image.data[i + 1] = rgb[1];
        image.data[i + 2] = rgb[2];
      }
    }
  }
}

/** Dark scale with bright spots at the given centers. */
export function syntheticScaleImage(
  width: number,
  height: number,
  centers: [number, number][],
  radius = 5,
): RgbaImage {
  const image = solidImage(width, height, [26, 26, 26]);
  for (const [cx, cy] of centers) {
    paintDisk(image, cx, cy, radius, [230, 230, 230]);
  }
  return image;
}

/** Binary mask PNG (white = spot) with disks at the given centers. */
export function syntheticMaskPng(
  width: number,
  height: number,
  centers: [number, number][],
  radius = 3,
): Uint8Array {
  const image = solidImage(width, height, [0, 0, 0]);
  for (const [cx, cy] of centers) {
    paintDisk(image, cx, cy, radius, [255, 255, 255]);
  }
  return encodePng(image);
}

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}
