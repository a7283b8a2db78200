export { BridgeError, DEFAULT_BASE_URL, resolveBaseUrl } from "./client.js";
export { fuse } from "./fuse.js";
export type { FuseOptions } from "./fuse.js";
export { parsePgm } from "./pgm.js";
export { close, open, tiles } from "./session.js";
export type { BridgeSession, OpenOptions } from "./session.js";
export type {
  GeorefCoefficients,
  PixelBlock,
  RasterInfo,
  SchemeConfig,
  SessionInfo,
  TileEntry,
  TileItem,
} from "./types.js";
