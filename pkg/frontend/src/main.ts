import { ApiClient } from "./api.js";
import { AppView } from "./view.js";

declare global {
  interface Window {
    MMAUTH_API?: string;
  }
}

export function resolveBaseUrl(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("api");
  const base = fromQuery ?? window.MMAUTH_API ?? "http://127.0.0.1:8000";
  return base.replace(/\/+$/, "");
}

const root = document.getElementById("app");
if (root !== null) {
  const api = new ApiClient(resolveBaseUrl());
  const view = new AppView(root, api);
  view.chaos.sync().catch(() => undefined);
}
