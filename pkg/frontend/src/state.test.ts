import { describe, expect, it } from "vitest";

import type { PredictionResult } from "./api.js";
import { ALTERNATE_RESULT, FIXTURE_RESULT } from "./mockServer.js";
import { DashboardStore, diffResults, lyricsDigest } from "./state.js";

function deferredPredict() {
  let resolveAll: (() => void) | null = null;
  const gate = new Promise<void>((resolve) => {
    resolveAll = resolve;
  });
  const calls: string[] = [];
  const predict = async (lyrics: string): Promise<PredictionResult> => {
    calls.push(lyrics);
    await gate;
    return FIXTURE_RESULT;
  };
  return { predict, calls, release: () => resolveAll?.() };
}

describe("DashboardStore.submit", () => {
  it("stores the result and appends to history", async () => {
    const store = new DashboardStore(async () => FIXTURE_RESULT);
    store.setDraft("hustle flow");
    const result = await store.submit();
    expect(result).toEqual(FIXTURE_RESULT);
    expect(store.lastResult).toEqual(FIXTURE_RESULT);
    expect(store.history).toHaveLength(1);
    expect(store.history[0]?.digest).toBe(lyricsDigest("hustle flow"));
    expect(store.status).toBe("idle");
  });

  it("blocks empty drafts", async () => {
    const store = new DashboardStore(async () => FIXTURE_RESULT);
    store.setDraft("   ");
    expect(store.canSubmit()).toBe(false);
    expect(await store.submit()).toBeNull();
    expect(store.history).toHaveLength(0);
  });

  it("locks while a request is pending", async () => {
    const { predict, calls, release } = deferredPredict();
    const store = new DashboardStore(predict);
    store.setDraft("first");
    const inflight = store.submit();
    expect(store.status).toBe("pending");
    expect(store.canSubmit()).toBe(false);
    store.setDraft("second");
    expect(await store.submit()).toBeNull(); // lock holds even with a new draft
    release();
    await inflight;
    expect(calls).toEqual(["first"]);
    expect(store.history).toHaveLength(1);
  });

  it("history is append-only across submissions", async () => {
    let n = 0;
    const store = new DashboardStore(async () => (n++ % 2 === 0 ? FIXTURE_RESULT : ALTERNATE_RESULT));
    const history = store.history;
    store.setDraft("one");
    await store.submit();
    const firstEntry = store.history[0];
    store.setDraft("two");
    await store.submit();
    expect(store.history).toBe(history); // same array, mutated by push only
    expect(store.history[0]).toBe(firstEntry);
    expect(store.history).toHaveLength(2);
  });

  it("captures API error codes", async () => {
    const store = new DashboardStore(async () => {
      const error = new Error("lyrics are empty after cleaning") as Error & { code: string };
      error.code = "no_content";
      throw error;
    });
    store.setDraft("[Intro]");
    expect(await store.submit()).toBeNull();
    expect(store.status).toBe("error");
    expect(store.lastError).toEqual({ code: "no_content", message: "lyrics are empty after cleaning" });
    expect(store.history).toHaveLength(0);
  });
});

describe("diffResults", () => {
  it("identical entries give all-zero deltas", () => {
    const diff = diffResults(FIXTURE_RESULT, FIXTURE_RESULT);
    for (const delta of Object.values(diff.genreProbDeltas)) expect(delta).toBe(0);
    expect(diff.successProbDelta).toBe(0);
    expect(diff.yearShift).toBe(0);
    expect(diff.rawYearShift).toBe(0);
    expect(diff.sentimentDelta).toBe(0);
    expect(diff.genreLabelChanged).toBe(false);
    expect(diff.successLabelChanged).toBe(false);
  });

  it("two results differing only in year give only year deltas", () => {
    const shifted: PredictionResult = {
      ...FIXTURE_RESULT,
      year: { raw_estimate: 2010.1, display_year: 2010 },
    };
    const diff = diffResults(FIXTURE_RESULT, shifted);
    expect(diff.yearShift).toBe(2010 - FIXTURE_RESULT.year.display_year);
    expect(diff.rawYearShift).toBeCloseTo(2010.1 - FIXTURE_RESULT.year.raw_estimate, 10);
    for (const delta of Object.values(diff.genreProbDeltas)) expect(delta).toBe(0);
    expect(diff.successProbDelta).toBe(0);
    expect(diff.sentimentDelta).toBe(0);
  });

  it("equals field-wise subtraction of the two stored documents", () => {
    const diff = diffResults(FIXTURE_RESULT, ALTERNATE_RESULT);
    for (const genre of Object.keys(FIXTURE_RESULT.genre.probs)) {
      expect(diff.genreProbDeltas[genre]).toBeCloseTo(
        ALTERNATE_RESULT.genre.probs[genre]! - FIXTURE_RESULT.genre.probs[genre]!,
        12,
      );
    }
    expect(diff.successProbDelta).toBeCloseTo(
      ALTERNATE_RESULT.success.prob_success - FIXTURE_RESULT.success.prob_success,
      12,
    );
    expect(diff.yearShift).toBe(
      ALTERNATE_RESULT.year.display_year - FIXTURE_RESULT.year.display_year,
    );
    expect(diff.sentimentDelta).toBeCloseTo(
      ALTERNATE_RESULT.sentiment.value - FIXTURE_RESULT.sentiment.value,
      12,
    );
    expect(diff.genreLabelChanged).toBe(true);
    expect(diff.successLabelChanged).toBe(true);
  });
});

describe("DashboardStore.compare", () => {
  it("is disabled below two entries and diffs stored documents", async () => {
    let n = 0;
    const store = new DashboardStore(async () => (n++ === 0 ? FIXTURE_RESULT : ALTERNATE_RESULT));
    expect(store.canCompare()).toBe(false);
    store.setDraft("a");
    await store.submit();
    expect(store.canCompare()).toBe(false);
    store.setDraft("b");
    await store.submit();
    expect(store.canCompare()).toBe(true);
    expect(store.compare(0, 1)).toEqual(diffResults(FIXTURE_RESULT, ALTERNATE_RESULT));
  });
});
