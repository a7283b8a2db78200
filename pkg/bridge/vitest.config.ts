import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // Tests spawn the service and shell out to the CLI, so they need room.
    testTimeout: 60_000,
    hookTimeout: 60_000,
  },
});
