import { type ChildProcess, execFileSync, spawn } from "node:child_process";
import { mkdirSync, writeFileSync } from "node:fs";
import { createServer } from "node:net";
import { join } from "node:path";

/** Binary PGM with the same header shape the service and CLI write. */
export function pgmBytes(width: number, height: number, data: Uint8Array): Buffer {
  if (data.length !== width * height) {
    throw new Error(`pixel count ${data.length} does not match ${width}x${height}`);
  }
  return Buffer.concat([Buffer.from(`P5\n${width} ${height}\n255\n`, "ascii"), data]);
}

/** Deterministic test pattern; every tile of it differs from every other. */
export function testPattern(width: number, height: number): Uint8Array {
  const data = new Uint8Array(width * height);
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      data[y * width + x] = (3 * x + 7 * y + x * y) % 251;
    }
  }
  return data;
}

/**
 * Write a georeferenced fixture raster: a PGM image plus the JSON sidecar
 * carrying size, GSD, affine transform, and CRS.
 */
export function writeRaster(dir: string, name: string, width: number, height: number): string {
  const imagePath = join(dir, `${name}.pgm`);
  writeFileSync(imagePath, pgmBytes(width, height, testPattern(width, height)));
  const gsd = 0.1;
  const sidecar = {
    version: 1,
    width,
    height,
    gsd: [gsd, gsd],
    transform: [gsd, 0.0, 1000.0, 0.0, -gsd, 2000.0],
    crs: "EPSG:32633",
  };
  writeFileSync(join(dir, `${name}.json`), JSON.stringify(sidecar) + "\n");
  return imagePath;
}

/** Run the geotiling CLI, throwing with its stderr if it exits nonzero. */
export function runCli(args: string[]): string {
  try {
    return execFileSync("geotiling", args, { encoding: "utf8", stdio: "pipe" });
  } catch (error) {
    const stderr = (error as { stderr?: string }).stderr ?? "";
    throw new Error(`geotiling ${args.join(" ")} failed:\n${stderr}`);
  }
}

/** Tile a raster via the CLI; returns the output's per-raster directory. */
export function cliTile(rasterPath: string, outDir: string, flags: string[]): string {
  mkdirSync(outDir, { recursive: true });
  runCli(["tile", rasterPath, "--out", outDir, ...flags]);
  const stem = rasterPath.split("/").pop()!.replace(/\.[^.]+$/, "");
  return join(outDir, stem);
}

async function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = createServer();
    probe.once("error", reject);
    probe.listen(0, "127.0.0.1", () => {
      const address = probe.address();
      if (address === null || typeof address === "string") {
        probe.close(() => reject(new Error("could not determine a free port")));
        return;
      }
      probe.close(() => resolve(address.port));
    });
  });
}

export interface ServiceHandle {
  baseUrl: string;
  stop: () => Promise<void>;
}

/** Start `geotiling serve` on a free port and wait until /health answers. */
export async function startService(): Promise<ServiceHandle> {
  const port = await freePort();
  const baseUrl = `http://127.0.0.1:${port}`;
  const child: ChildProcess = spawn("geotiling", ["serve", "--port", String(port)], {
    stdio: ["ignore", "ignore", "pipe"],
  });
  let stderr = "";
  child.stderr?.on("data", (chunk: Buffer) => {
    stderr += chunk.toString();
  });
  let exited = false;
  child.once("exit", () => {
    exited = true;
  });

  const deadline = Date.now() + 30_000;
  while (Date.now() < deadline) {
    if (exited) {
      throw new Error(`service exited during startup:\n${stderr}`);
    }
    try {
      const response = await fetch(`${baseUrl}/health`);
      if (response.ok) {
        break;
      }
    } catch {
      // not listening yet
    }
    await new Promise((resolve) => setTimeout(resolve, 100));
  }
  if (Date.now() >= deadline) {
    child.kill();
    throw new Error(`service did not become healthy on port ${port}:\n${stderr}`);
  }

  return {
    baseUrl,
    stop: () =>
      new Promise((resolve) => {
        if (exited) {
          resolve();
          return;
        }
        child.once("exit", () => resolve());
        child.kill();
      }),
  };
}
