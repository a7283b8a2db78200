import type { PixelBlock } from "./types.js";

function isSpace(byte: number): boolean {
  return byte === 0x20 || byte === 0x09 || byte === 0x0a || byte === 0x0d || byte === 0x0c || byte === 0x0b;
}

/**
 * Decode a binary PGM (P5) into a pixel block.  The payload is kept as a
 * view into `raw`, so no pixel bytes are copied or re-encoded.
 */
export function parsePgm(raw: Buffer): PixelBlock {
  if (raw.length < 2 || raw[0] !== 0x50 || raw[1] !== 0x35) {
    throw new Error("not a binary PGM: missing P5 magic");
  }
  const fields: number[] = [];
  let pos = 2;
  while (fields.length < 3) {
    while (pos < raw.length && isSpace(raw[pos]!)) {
      pos += 1;
    }
    const start = pos;
    while (pos < raw.length && !isSpace(raw[pos]!)) {
      pos += 1;
    }
    const field = Number.parseInt(raw.subarray(start, pos).toString("ascii"), 10);
    if (!Number.isInteger(field) || field < 0) {
      throw new Error(`bad PGM header field: ${raw.subarray(start, pos).toString("ascii")}`);
    }
    fields.push(field);
  }
  pos += 1; // single whitespace byte ends the header
  const [width, height, maxval] = fields as [number, number, number];
  const bytesPerSample = maxval > 255 ? 2 : 1;
  const expected = width * height * bytesPerSample;
  const data = raw.subarray(pos, pos + expected);
  if (data.length !== expected) {
    throw new Error(`PGM payload truncated: expected ${expected} bytes, got ${data.length}`);
  }
  return { width, height, maxval, bytesPerSample, data, raw };
}
