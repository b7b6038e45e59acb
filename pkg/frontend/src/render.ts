// DOM rendering for the result panels. Every number shown comes verbatim
// from the API document; the only transformation is display formatting.

import type { PredictionResult } from "./api.js";
import type { HistoryEntry, ResultDiff } from "./state.js";

export function formatPercent(p: number): string {
  return (p * 100).toFixed(1) + "%";
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderGenrePanel(container: HTMLElement, result: PredictionResult): void {
  container.innerHTML = "";
  container.appendChild(el("h3", "panel-title", "Genre"));
  container.appendChild(el("div", "panel-headline", result.genre.label));
  const list = el("div", "prob-bars");
  const ranked = Object.entries(result.genre.probs).sort((x, y) => y[1] - x[1]);
  for (const [genre, prob] of ranked) {
    const row = el("div", "prob-row");
    row.dataset.genre = genre;
    row.appendChild(el("span", "prob-label", genre));
    const track = el("div", "prob-track");
    const bar = el("div", "prob-bar");
    bar.style.width = `${(prob * 100).toFixed(1)}%`;
    if (genre === result.genre.label) bar.classList.add("prob-bar-top");
    track.appendChild(bar);
    row.appendChild(track);
    row.appendChild(el("span", "prob-value", formatPercent(prob)));
    list.appendChild(row);
  }
  container.appendChild(list);
}

export function renderSuccessPanel(container: HTMLElement, result: PredictionResult): void {
  container.innerHTML = "";
  container.appendChild(el("h3", "panel-title", "Success"));
  const badge = el("div", `badge badge-${result.success.label}`, result.success.label);
  container.appendChild(badge);
  container.appendChild(
    el("div", "panel-detail", `P(success) = ${formatPercent(result.success.prob_success)}`),
  );
}

export function renderYearPanel(container: HTMLElement, result: PredictionResult): void {
  container.innerHTML = "";
  container.appendChild(el("h3", "panel-title", "Release year"));
  container.appendChild(el("div", "panel-headline", String(result.year.display_year)));
  container.appendChild(
    el("div", "panel-detail", `raw estimate ${result.year.raw_estimate.toFixed(1)}`),
  );
}

export function renderSentimentPanel(container: HTMLElement, result: PredictionResult): void {
  container.innerHTML = "";
  container.appendChild(el("h3", "panel-title", "Sentiment"));
  const value = result.sentiment.value;
  container.appendChild(el("div", "panel-headline", value.toFixed(3)));
  const gauge = el("div", "gauge");
  const needle = el("div", "gauge-needle");
  // map [-1, 1] onto [0%, 100%] of the gauge track
  needle.style.left = `${((value + 1) / 2) * 100}%`;
  gauge.appendChild(needle);
  container.appendChild(gauge);
  const tone = value > 0.05 ? "positive" : value < -0.05 ? "negative" : "neutral";
  container.appendChild(el("div", "panel-detail", tone));
}

export function renderResult(result: PredictionResult): void {
  renderGenrePanel(expect("panel-genre"), result);
  renderSuccessPanel(expect("panel-success"), result);
  renderYearPanel(expect("panel-year"), result);
  renderSentimentPanel(expect("panel-sentiment"), result);
  const meta = expect("result-meta");
  meta.textContent = `models: ${Object.values(result.model_ids).join(", ")} · ${result.latency_ms.toFixed(0)} ms`;
}

export function renderHistory(container: HTMLElement, history: HistoryEntry[]): void {
  container.innerHTML = "";
  history.forEach((entry, index) => {
    const row = el("label", "history-row");
    const checkbox = el("input") as HTMLInputElement;
    checkbox.type = "checkbox";
    checkbox.className = "history-pick";
    checkbox.dataset.index = String(index);
    row.appendChild(checkbox);
    const snippet = entry.lyrics.replace(/\s+/g, " ").slice(0, 48);
    row.appendChild(
      el(
        "span",
        "history-text",
        `#${index + 1} [${entry.digest}] ${entry.result.genre.label} · ${entry.result.year.display_year} · ${snippet}`,
      ),
    );
    container.appendChild(row);
  });
}

const DELTA_PRECISION = 4;

export function renderDiff(container: HTMLElement, diff: ResultDiff): void {
  container.innerHTML = "";
  container.appendChild(el("h3", "panel-title", "Comparison (B − A)"));
  const table = el("table", "diff-table");
  const add = (field: string, delta: string) => {
    const row = el("tr");
    row.appendChild(el("td", "diff-field", field));
    row.appendChild(el("td", "diff-value", delta));
    table.appendChild(row);
  };
  for (const [genre, delta] of Object.entries(diff.genreProbDeltas)) {
    add(`genre p(${genre})`, signed(delta));
  }
  add("genre label", diff.genreLabelChanged ? "changed" : "unchanged");
  add("p(success)", signed(diff.successProbDelta));
  add("success label", diff.successLabelChanged ? "changed" : "unchanged");
  add("display year", signedInt(diff.yearShift));
  add("raw year", signed(diff.rawYearShift));
  add("sentiment", signed(diff.sentimentDelta));
  container.appendChild(table);
}

function signed(value: number): string {
  const fixed = value.toFixed(DELTA_PRECISION);
  return value > 0 ? `+${fixed}` : fixed;
}

function signedInt(value: number): string {
  return value > 0 ? `+${value}` : String(value);
}

export function expect(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id} in document`);
  return node;
}
