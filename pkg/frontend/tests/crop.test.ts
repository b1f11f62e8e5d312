import { createHash } from "node:crypto";
import { describe, expect, it } from "vitest";

import {
  cropAndOrient,
  cropRect,
  decodePng,
  encodePng,
  rotateQuarter,
} from "../src/crop.js";
import { paintDisk, solidImage, syntheticScaleImage } from "./helpers.js";

function checksum(bytes: Uint8Array): string {
  return createHash("sha256").update(bytes).digest("hex");
}

describe("png round trip", () => {
  it("decode(encode(image)) is bit exact", () => {
    const image = syntheticScaleImage(20, 14, [[5, 5], [14, 9]]);
    const back = decodePng(encodePng(image));
    expect(back.width).toBe(20);
    expect(back.height).toBe(14);
    expect(Buffer.from(back.data).equals(Buffer.from(image.data))).toBe(true);
  });
});

describe("cropRect", () => {
  it("full-image rectangle is a passthrough", () => {
    const image = syntheticScaleImage(16, 12, [[4, 4]]);
    const out = cropRect(image, { x: 0, y: 0, width: 16, height: 12 });
    expect(checksum(out.data)).toBe(checksum(image.data));
  });

  it("extracts exactly the requested pixels", () => {
    const image = solidImage(8, 8, [10, 20, 30]);
    paintDisk(image, 5, 2, 0, [200, 0, 0]); // single marked pixel at (5, 2)
    const out = cropRect(image, { x: 4, y: 1, width: 3, height: 3 });
    expect(out.width).toBe(3);
    expect(out.height).toBe(3);
    // marked pixel lands at (1, 1) of the crop
    const i = (1 * 3 + 1) * 4;
    expect([out.data[i], out.data[i + 1], out.data[i + 2]]).toEqual([200, 0, 0]);
  });

  it("rejects degenerate and out-of-bounds rectangles", () => {
    const image = solidImage(8, 8, [0, 0, 0]);
    expect(() => cropRect(image, { x: 0, y: 0, width: 0, height: 5 })).toThrow(
      /degenerate/,
    );
    expect(() => cropRect(image, { x: 4, y: 4, width: 8, height: 2 })).toThrow(
      /bounds/,
    );
    expect(() =>
      cropRect(image, { x: 0.5, y: 0, width: 2, height: 2 }),
    ).toThrow(/integer/);
  });
});

describe("rotateQuarter", () => {
  const image = solidImage(3, 2, [1, 1, 1]);
  paintDisk(image, 0, 0, 0, [9, 9, 9]); // marker at top-left

  it("zero turns is a passthrough copy", () => {
    const out = rotateQuarter(image, 0);
    expect(checksum(out.data)).toBe(checksum(image.data));
    expect(out.data).not.toBe(image.data);
  });

  it("two turns is a 180 degree rotation", () => {
    const out = rotateQuarter(image, 2);
    expect(out.width).toBe(3);
    expect(out.height).toBe(2);
    const i = (1 * 3 + 2) * 4; // marker moves to bottom-right
    expect(out.data[i]).toBe(9);
  });

  it("one clockwise turn swaps dimensions and moves the corner", () => {
    const out = rotateQuarter(image, 1);
    expect(out.width).toBe(2);
    expect(out.height).toBe(3);
    const i = (0 * 2 + 1) * 4; // top-left goes to top-right
    expect(out.data[i]).toBe(9);
  });

  it("four turns is identity, negative turns wrap", () => {
    expect(checksum(rotateQuarter(image, 4).data)).toBe(checksum(image.data));
    expect(checksum(rotateQuarter(image, -1).data)).toBe(
      checksum(rotateQuarter(image, 3).data),
    );
  });

  it("rejects fractional turns", () => {
    expect(() => rotateQuarter(image, 0.5)).toThrow(/integer/);
  });
});

describe("cropAndOrient", () => {
  it("crop happens before rotation", () => {
    const image = syntheticScaleImage(20, 10, [[3, 3]]);
    const direct = rotateQuarter(
      cropRect(image, { x: 0, y: 0, width: 10, height: 10 }),
      1,
    );
    const combined = cropAndOrient(
      image,
      { x: 0, y: 0, width: 10, height: 10 },
      1,
    );
    expect(checksum(combined.data)).toBe(checksum(direct.data));
  });
});
