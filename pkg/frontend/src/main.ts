import { ApiClient } from "./api.js";
import { createApp } from "./app.js";

declare global {
  interface Window {
    SPECSYNTH_API_URL?: string;
  }
}

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("api") ?? window.SPECSYNTH_API_URL ?? "";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app element");
createApp(root, new ApiClient(baseUrl));
