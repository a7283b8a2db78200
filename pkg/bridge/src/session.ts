import { requestBytes, requestJson, resolveBaseUrl } from "./client.js";
import { parsePgm } from "./pgm.js";
import type { SchemeConfig, SessionInfo, TileEntry, TileItem } from "./types.js";

export interface OpenOptions {
  /** Service address; defaults to GEOTILING_URL or http://127.0.0.1:8008. */
  baseUrl?: string;
}

/**
 * An opened raster with its tiling.  `tileList` holds every tile in
 * manifest order; iteration with tiles() follows it exactly.
 */
export interface BridgeSession {
  readonly baseUrl: string;
  readonly sessionId: string;
  readonly info: SessionInfo;
  readonly tileList: readonly TileEntry[];
}

interface TileListResponse {
  session_id: string;
  tiles: TileEntry[];
}

/**
 * Open a raster and build its tiling on the service.  The config carries
 * the same keys as the CLI flags; tile_m or tile_px is required.
 */
export async function open(
  rasterPath: string,
  config: SchemeConfig = {},
  options: OpenOptions = {},
): Promise<BridgeSession> {
  const baseUrl = resolveBaseUrl(options.baseUrl);
  const info = await requestJson<SessionInfo>(baseUrl, "POST", "/sessions", {
    raster_path: rasterPath,
    config,
  });
  const listing = await requestJson<TileListResponse>(
    baseUrl,
    "GET",
    `/sessions/${info.session_id}/tiles`,
  );
  return { baseUrl, sessionId: info.session_id, info, tileList: listing.tiles };
}

/**
 * Iterate the session's tiles in manifest order, fetching each pixel block
 * on demand.  Yields (tileId, block, georef) per tile.
 */
export async function* tiles(session: BridgeSession): AsyncGenerator<TileItem, void, void> {
  for (const entry of session.tileList) {
    const raw = await requestBytes(
      session.baseUrl,
      `/sessions/${session.sessionId}/tiles/${entry.id}/data`,
    );
    yield { tileId: entry.id, block: parsePgm(raw), georef: entry.georef };
  }
}

/** Release the session on the service; true if it was still open. */
export async function close(session: BridgeSession): Promise<boolean> {
  const result = await requestJson<{ closed: boolean }>(
    session.baseUrl,
    "DELETE",
    `/sessions/${session.sessionId}`,
  );
  return result.closed;
}
