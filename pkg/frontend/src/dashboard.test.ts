// End-to-end dashboard tests against the mock server, driving the real
// index.html markup through the DOM.

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient } from "./api.js";
import { bootstrap } from "./main.js";
import { ALTERNATE_RESULT, FIXTURE_RESULT, mockServer, type MockServer } from "./mockServer.js";
import { diffResults } from "./state.js";

const HTML = readFileSync(
  join(dirname(fileURLToPath(import.meta.url)), "..", "index.html"),
  "utf-8",
);

function mountDocument(): void {
  const body = HTML.slice(HTML.indexOf("<body>") + "<body>".length, HTML.indexOf("</body>"));
  document.body.innerHTML = body;
}

function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}

function setLyrics(text: string): void {
  const textarea = document.getElementById("lyrics-input") as HTMLTextAreaElement;
  textarea.value = text;
  textarea.dispatchEvent(new Event("input", { bubbles: true }));
}

function click(id: string): void {
  (document.getElementById(id) as HTMLButtonElement).click();
}

function startApp(server: MockServer) {
  vi.stubGlobal("fetch", server.fetch);
  return bootstrap(new ApiClient());
}

afterEach(() => {
  vi.unstubAllGlobals();
});

beforeEach(() => {
  mountDocument();
});

describe("submit flow", () => {
  it("renders all four panels with the fixture values", async () => {
    startApp(mockServer());
    setLyrics("hustle flow rhyme streets");
    click("submit-button");
    await flush();

    expect((document.getElementById("results") as HTMLElement).hidden).toBe(false);
    expect(document.querySelector("#panel-genre .panel-headline")?.textContent).toBe("rap");
    const rows = Array.from(document.querySelectorAll("#panel-genre .prob-row"));
    expect(rows).toHaveLength(5);
    const rapRow = rows.find((row) => (row as HTMLElement).dataset.genre === "rap");
    expect(rapRow?.querySelector(".prob-value")?.textContent).toBe("62.0%");

    const badge = document.querySelector("#panel-success .badge");
    expect(badge?.textContent).toBe("success");
    expect(document.querySelector("#panel-success .panel-detail")?.textContent).toContain("73.4%");

    expect(document.querySelector("#panel-year .panel-headline")?.textContent).toBe("2005");
    expect(document.querySelector("#panel-year .panel-detail")?.textContent).toContain("2004.6");

    expect(document.querySelector("#panel-sentiment .panel-headline")?.textContent).toBe("-0.210");
  });

  it("rendered genre percentages sum to 100% within display rounding", async () => {
    startApp(mockServer());
    setLyrics("some words");
    click("submit-button");
    await flush();
    const values = Array.from(document.querySelectorAll("#panel-genre .prob-value")).map(
      (node) => parseFloat(node.textContent!.replace("%", "")),
    );
    const total = values.reduce((a, b) => a + b, 0);
    expect(Math.abs(total - 100)).toBeLessThanOrEqual(0.05 * values.length);
  });

  it("empty textarea keeps submit disabled and sends nothing", async () => {
    const server = mockServer();
    startApp(server);
    const button = document.getElementById("submit-button") as HTMLButtonElement;
    expect(button.disabled).toBe(true);
    setLyrics("   ");
    expect(button.disabled).toBe(true);
    click("submit-button");
    await flush();
    expect(server.calls).toHaveLength(0);
  });

  it("pending lock prevents overlapping requests", async () => {
    const server = mockServer({ deferred: true });
    startApp(server);
    setLyrics("first draft");
    click("submit-button");
    expect((document.getElementById("submit-button") as HTMLButtonElement).disabled).toBe(true);
    click("submit-button");
    click("submit-button");
    await flush();
    expect(server.calls).toHaveLength(1);
    server.release();
    await flush();
    expect(server.calls).toHaveLength(1);
    expect((document.getElementById("submit-button") as HTMLButtonElement).disabled).toBe(false);
  });

  it("shows the inline empty-lyrics message on 422", async () => {
    startApp(mockServer());
    setLyrics("[Intro]");
    click("submit-button");
    await flush();
    const banner = document.getElementById("error-banner") as HTMLElement;
    expect(banner.hidden).toBe(false);
    expect(banner.textContent).toContain("too short/empty");
    expect((document.getElementById("retry-button") as HTMLElement).hidden).toBe(true);
  });

  it("shows the models-loading banner with retry on 503", async () => {
    const server = mockServer({ unavailable: true });
    startApp(server);
    setLyrics("real words");
    click("submit-button");
    await flush();
    const banner = document.getElementById("error-banner") as HTMLElement;
    expect(banner.hidden).toBe(false);
    expect(banner.textContent).toContain("models loading");
    const retry = document.getElementById("retry-button") as HTMLButtonElement;
    expect(retry.hidden).toBe(false);
    retry.click();
    await flush();
    expect(server.calls).toHaveLength(2);
  });
});

describe("history and comparison", () => {
  it("appends one history row per successful submit", async () => {
    startApp(mockServer());
    setLyrics("take one");
    click("submit-button");
    await flush();
    setLyrics("take two");
    click("submit-button");
    await flush();
    expect(document.querySelectorAll("#history-list .history-row")).toHaveLength(2);
  });

  it("compare is disabled until two entries exist", async () => {
    startApp(mockServer());
    const compare = document.getElementById("compare-button") as HTMLButtonElement;
    expect(compare.disabled).toBe(true);
    setLyrics("only one");
    click("submit-button");
    await flush();
    expect(compare.disabled).toBe(true);
  });

  it("renders per-field deltas equal to field-wise subtraction", async () => {
    const server = mockServer({
      resultFor: (lyrics) => (lyrics.includes("second") ? ALTERNATE_RESULT : FIXTURE_RESULT),
    });
    startApp(server);
    setLyrics("first version");
    click("submit-button");
    await flush();
    setLyrics("second version");
    click("submit-button");
    await flush();

    const picks = document.querySelectorAll<HTMLInputElement>("#history-list .history-pick");
    picks[0]!.checked = true;
    picks[1]!.checked = true;
    click("compare-button");

    const expected = diffResults(FIXTURE_RESULT, ALTERNATE_RESULT);
    const cells: Record<string, string> = {};
    for (const row of document.querySelectorAll("#diff-panel tr")) {
      const [field, value] = Array.from(row.querySelectorAll("td")).map((td) => td.textContent!);
      cells[field!] = value!;
    }
    expect(parseFloat(cells["p(success)"]!)).toBeCloseTo(expected.successProbDelta, 4);
    expect(parseInt(cells["display year"]!, 10)).toBe(expected.yearShift);
    expect(parseFloat(cells["sentiment"]!)).toBeCloseTo(expected.sentimentDelta, 4);
    for (const genre of Object.keys(FIXTURE_RESULT.genre.probs)) {
      expect(parseFloat(cells[`genre p(${genre})`]!)).toBeCloseTo(
        expected.genreProbDeltas[genre]!,
        4,
      );
    }
    expect(cells["genre label"]).toBe("changed");
  });

  it("two identical submissions diff to zero", async () => {
    startApp(mockServer());
    for (const text of ["same lyric", "same lyric"]) {
      setLyrics(text);
      click("submit-button");
      await flush();
    }
    const picks = document.querySelectorAll<HTMLInputElement>("#history-list .history-pick");
    picks[0]!.checked = true;
    picks[1]!.checked = true;
    click("compare-button");
    for (const row of document.querySelectorAll("#diff-panel tr")) {
      const value = row.querySelectorAll("td")[1]!.textContent!;
      if (value === "changed" || value === "unchanged") {
        expect(value).toBe("unchanged");
      } else {
        expect(parseFloat(value)).toBeCloseTo(0, 10);
      }
    }
  });
});
