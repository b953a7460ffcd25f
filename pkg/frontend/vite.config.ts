import { defineConfig } from "vitest/config";

export default defineConfig({
  server: {
    proxy: {
      "/datasets": "http://127.0.0.1:8000",
      "/explanations": "http://127.0.0.1:8000",
      "/runs": "http://127.0.0.1:8000",
    },
  },
  test: {
    environment: "jsdom",
  },
});
