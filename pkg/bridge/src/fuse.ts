import { requestJson, resolveBaseUrl } from "./client.js";

export interface FuseOptions {
  /** Service address; defaults to GEOTILING_URL or http://127.0.0.1:8008. */
  baseUrl?: string;
}

interface PathResponse {
  out_path: string;
}

/**
 * Fuse per-tile predictions back into one raster, exactly as the CLI fuse
 * command does for the same manifest.  Returns the written fused path.
 */
export async function fuse(
  manifestPath: string,
  predictionsDir: string,
  outPath: string,
  options: FuseOptions = {},
): Promise<string> {
  const baseUrl = resolveBaseUrl(options.baseUrl);
  const result = await requestJson<PathResponse>(baseUrl, "POST", "/jobs/fuse", {
    manifest_path: manifestPath,
    predictions_dir: predictionsDir,
    out_path: outPath,
  });
  return result.out_path;
}
