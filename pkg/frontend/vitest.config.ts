import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    // tests drive a spawned core process; allow for interpreter startup
    testTimeout: 30000,
    hookTimeout: 30000,
  },
});
