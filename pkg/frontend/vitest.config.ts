import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    include: ["tests/**/*.test.ts"],
    // the roundtrip test boots the Python service and runs real solves
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
