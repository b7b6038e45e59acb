// Dashboard wiring: textarea + submit on the left, result panels on the
// right, session history with two-entry comparison below.

import { ApiClient } from "./api.js";
import { renderDiff, renderHistory, renderResult, expect } from "./render.js";
import { DashboardStore } from "./state.js";

function apiBaseUrl(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("api");
  if (fromQuery !== null) {
    window.localStorage.setItem("lyriclens.api", fromQuery);
    return fromQuery;
  }
  return window.localStorage.getItem("lyriclens.api") ?? "";
}

export function bootstrap(client?: ApiClient): DashboardStore {
  const api = client ?? new ApiClient(apiBaseUrl());
  const store = new DashboardStore((lyrics) => api.predict(lyrics));

  const textarea = expect("lyrics-input") as HTMLTextAreaElement;
  const submitButton = expect("submit-button") as HTMLButtonElement;
  const retryButton = expect("retry-button") as HTMLButtonElement;
  const banner = expect("error-banner");
  const statusLine = expect("status-line");
  const historyContainer = expect("history-list");
  const diffContainer = expect("diff-panel");
  const compareButton = expect("compare-button") as HTMLButtonElement;

  textarea.addEventListener("input", () => store.setDraft(textarea.value));
  submitButton.addEventListener("click", () => void store.submit());
  retryButton.addEventListener("click", () => void store.submit());

  compareButton.addEventListener("click", () => {
    const picks = Array.from(
      historyContainer.querySelectorAll<HTMLInputElement>(".history-pick:checked"),
    ).map((box) => Number(box.dataset.index));
    if (picks.length !== 2) {
      diffContainer.textContent = "pick exactly two history entries to compare";
      return;
    }
    const [first, second] = [Math.min(picks[0]!, picks[1]!), Math.max(picks[0]!, picks[1]!)];
    renderDiff(diffContainer, store.compare(first, second));
  });

  store.onChange(() => {
    submitButton.disabled = !store.canSubmit();
    compareButton.disabled = !store.canCompare();
    statusLine.textContent = store.status === "pending" ? "predicting…" : "";

    if (store.status === "error" && store.lastError) {
      banner.hidden = false;
      const { code, message } = store.lastError;
      if (code === "no_content") {
        banner.textContent = "lyrics too short/empty after cleaning";
        retryButton.hidden = true;
      } else if (code === "model_unavailable" || code === "loading") {
        banner.textContent = "models loading, try again shortly";
        retryButton.hidden = false;
      } else {
        banner.textContent = `${code}: ${message}`;
        retryButton.hidden = false;
      }
    } else {
      banner.hidden = true;
      retryButton.hidden = true;
    }

    if (store.lastResult) {
      renderResult(store.lastResult);
      expect("results").hidden = false;
    }
    renderHistory(historyContainer, store.history);
  });

  submitButton.disabled = true;
  compareButton.disabled = true;
  return store;
}

// browser entry point; tests import bootstrap directly
if (typeof document !== "undefined" && document.getElementById("lyrics-input")) {
  bootstrap();
}
