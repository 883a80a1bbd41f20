/** In-browser decoder for the raw `.lclip` clip container.
 *
 * Layout (little-endian):
 *   magic "LCLP" | version u16 | width u16 | height u16 | fps u16 |
 *   frame_count u32 | label u8 | group u8 | clip u16 | reserved u32
 * then per frame: index u32 | timestamp_ms u32 | RGB24 payload.
 */

export interface DecodedFrame {
  index: number;
  timestampMs: number;
  /** RGBA pixels ready for ImageData. */
  rgba: Uint8ClampedArray;
}

export interface DecodedClip {
  width: number;
  height: number;
  fps: number;
  label: number | null;
  groupId: number;
  clipId: number;
  frames: DecodedFrame[];
  durationS: number;
}

const HEADER_BYTES = 24;
const FRAME_HEADER_BYTES = 8;
const UNLABELED = 255;

export function decodeClip(buffer: ArrayBuffer): DecodedClip {
  const view = new DataView(buffer);
  if (buffer.byteLength < HEADER_BYTES) {
    throw new Error('clip truncated: missing header');
  }
  const magic = String.fromCharCode(
    view.getUint8(0), view.getUint8(1), view.getUint8(2), view.getUint8(3),
  );
  if (magic !== 'LCLP') {
    throw new Error(`not a clip container (magic ${magic})`);
  }
  const version = view.getUint16(4, true);
  if (version !== 1) {
    throw new Error(`unsupported clip version ${version}`);
  }
  const width = view.getUint16(6, true);
  const height = view.getUint16(8, true);
  const fps = view.getUint16(10, true);
  const frameCount = view.getUint32(12, true);
  const labelByte = view.getUint8(16);
  const groupId = view.getUint8(17);
  const clipId = view.getUint16(18, true);

  const payloadBytes = width * height * 3;
  const frames: DecodedFrame[] = [];
  let offset = HEADER_BYTES;
  for (let i = 0; i < frameCount; i++) {
    if (offset + FRAME_HEADER_BYTES + payloadBytes > buffer.byteLength) {
      throw new Error(`clip truncated at frame ${i}`);
    }
    const index = view.getUint32(offset, true);
    const timestampMs = view.getUint32(offset + 4, true);
    offset += FRAME_HEADER_BYTES;
    const rgb = new Uint8Array(buffer, offset, payloadBytes);
    const rgba = new Uint8ClampedArray(width * height * 4);
    for (let p = 0, q = 0; p < payloadBytes; p += 3, q += 4) {
      rgba[q] = rgb[p];
      rgba[q + 1] = rgb[p + 1];
      rgba[q + 2] = rgb[p + 2];
      rgba[q + 3] = 255;
    }
    offset += payloadBytes;
    frames.push({ index, timestampMs, rgba });
  }
  return {
    width,
    height,
    fps,
    label: labelByte === UNLABELED ? null : labelByte,
    groupId,
    clipId,
    frames,
    durationS: fps > 0 ? frameCount / fps : 0,
  };
}
