import { MastApi } from "./api.js";
import { mountConsole } from "./app.js";

declare global {
  interface Window {
    MAST_API_BASE?: string;
  }
}

const root = document.getElementById("console");
if (root) {
  mountConsole(root, new MastApi(window.MAST_API_BASE ?? ""));
}
