/** HTTP plumbing shared by all bridge operations. */

export const DEFAULT_BASE_URL = "http://127.0.0.1:8008";

/** Where to reach the service: explicit option, else GEOTILING_URL, else localhost. */
export function resolveBaseUrl(baseUrl?: string): string {
  const url = baseUrl ?? process.env.GEOTILING_URL ?? DEFAULT_BASE_URL;
  return url.replace(/\/+$/, "");
}

/**
 * Raised when the service answers with an error status.  `status` is the
 * service's code for the failure (404 missing input, 422 bad arguments,
 * 400 unreadable data, 500 internal) and `detail` its message verbatim.
 */
export class BridgeError extends Error {
  readonly status: number;
  readonly detail: string;

  constructor(status: number, detail: string) {
    super(`geotiling service error ${status}: ${detail}`);
    this.name = "BridgeError";
    this.status = status;
    this.detail = detail;
  }
}

async function errorFromResponse(response: Response): Promise<BridgeError> {
  const text = await response.text();
  try {
    const body = JSON.parse(text) as { detail?: unknown };
    if (typeof body.detail === "string") {
      return new BridgeError(response.status, body.detail);
    }
  } catch {
    // not JSON; fall through to the raw text
  }
  return new BridgeError(response.status, text || response.statusText);
}

/** JSON request/response round trip; throws BridgeError on non-2xx. */
export async function requestJson<T>(
  baseUrl: string,
  method: "GET" | "POST" | "DELETE",
  path: string,
  body?: unknown,
): Promise<T> {
  const response = await fetch(baseUrl + path, {
    method,
    headers: body === undefined ? undefined : { "content-type": "application/json" },
    body: body === undefined ? undefined : JSON.stringify(body),
  });
  if (!response.ok) {
    throw await errorFromResponse(response);
  }
  return (await response.json()) as T;
}

/** Binary GET; throws BridgeError on non-2xx. */
export async function requestBytes(baseUrl: string, path: string): Promise<Buffer> {
  const response = await fetch(baseUrl + path);
  if (!response.ok) {
    throw await errorFromResponse(response);
  }
  return Buffer.from(await response.arrayBuffer());
}
