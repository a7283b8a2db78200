/**
 * Wire types for the geotiling service.  Field names are the JSON keys the
 * service sends and receives; the bridge passes them through unchanged.
 */

/** Six affine coefficients (a, b, c, d, e, f) mapping pixel (col, row) to
 * geographic (x, y):
 *   x = a * col + b * row + c
 *   y = d * col + e * row + f
 */
export type GeorefCoefficients = [number, number, number, number, number, number];

/**
 * Tiling options, mirroring the CLI flags one-to-one.  Every field is
 * optional; the service applies the same defaults as the CLI.
 */
export interface SchemeConfig {
  /** Tile extent in ground meters (exclusive with tile_px). */
  tile_m?: number;
  /** Tile extent in pixels (exclusive with tile_m). */
  tile_px?: number;
  /** Stride divisor m; consecutive tiles start tile/m apart. */
  stride_div?: number;
  /** "floor" keeps tiles fully inside the raster, "ceil" covers it. */
  rounding?: "floor" | "ceil";
  /** "center" places the grid symmetrically, "corner" pins it at the origin. */
  anchor?: "center" | "corner";
  /** Model input size; tile pixels are resampled to this square. */
  model_px?: number;
  zoom?: number;
  include_partial?: boolean;
  image_format?: "pgm" | "png";
  resample?: "nearest" | "bilinear";
  class_property?: string;
  background?: number;
  jobs?: number;
}

/** One tile of an opened session, as listed by the service. */
export interface TileEntry {
  id: string;
  index: [number, number];
  origin_px: [number, number];
  extent_px: [number, number];
  /** Pixel window (x0, y0, x1, y1), half-open. */
  window: [number, number, number, number];
  georef: GeorefCoefficients;
}

export interface RasterInfo {
  width: number;
  height: number;
  gsd: [number, number];
  transform: GeorefCoefficients;
  crs: string;
  nodata: number | null;
}

export interface SessionInfo {
  session_id: string;
  raster_id: string;
  raster: RasterInfo;
  counts: [number, number];
  offset_px: [number, number];
  tile_count: number;
  stride_divisor: number;
  model_px: [number, number] | null;
  image_format: string;
}

/**
 * Decoded tile pixels.  `data` is the contiguous row-major sample buffer
 * (top row first, `bytesPerSample` bytes each, 16-bit samples big-endian);
 * `raw` is the complete image as served, byte-identical to the tile file
 * the CLI writes for the same configuration.
 */
export interface PixelBlock {
  width: number;
  height: number;
  maxval: number;
  bytesPerSample: 1 | 2;
  data: Buffer;
  raw: Buffer;
}

/** One item of a session iteration. */
export interface TileItem {
  tileId: string;
  block: PixelBlock;
  georef: GeorefCoefficients;
}
