// Session state for the dashboard: draft lyrics, request lifecycle,
// append-only history, and result diffing for the what-if editing loop.

import type { PredictionResult } from "./api.js";

export type RequestStatus = "idle" | "pending" | "error";

export interface HistoryEntry {
  digest: string;
  lyrics: string;
  result: PredictionResult;
  at: number;
}

/** FNV-1a digest, enough to identify a draft within one session. */
export function lyricsDigest(text: string): string {
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash.toString(16).padStart(8, "0");
}

export interface ResultDiff {
  genreProbDeltas: Record<string, number>;
  genreLabelChanged: boolean;
  successProbDelta: number;
  successLabelChanged: boolean;
  yearShift: number;
  rawYearShift: number;
  sentimentDelta: number;
}

/** Field-wise subtraction: (b - a) for every numeric field. */
export function diffResults(a: PredictionResult, b: PredictionResult): ResultDiff {
  const genreProbDeltas: Record<string, number> = {};
  const classes = new Set([...Object.keys(a.genre.probs), ...Object.keys(b.genre.probs)]);
  for (const cls of classes) {
    genreProbDeltas[cls] = (b.genre.probs[cls] ?? 0) - (a.genre.probs[cls] ?? 0);
  }
  return {
    genreProbDeltas,
    genreLabelChanged: a.genre.label !== b.genre.label,
    successProbDelta: b.success.prob_success - a.success.prob_success,
    successLabelChanged: a.success.label !== b.success.label,
    yearShift: b.year.display_year - a.year.display_year,
    rawYearShift: b.year.raw_estimate - a.year.raw_estimate,
    sentimentDelta: b.sentiment.value - a.sentiment.value,
  };
}

export type PredictFn = (lyrics: string) => Promise<PredictionResult>;

export class DashboardStore {
  draft = "";
  status: RequestStatus = "idle";
  lastResult: PredictionResult | null = null;
  lastError: { code: string; message: string } | null = null;
  readonly history: HistoryEntry[] = [];
  private listeners: Array<() => void> = [];

  constructor(private readonly predictFn: PredictFn) {}

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }

  setDraft(text: string): void {
    this.draft = text;
    this.emit();
  }

  canSubmit(): boolean {
    return this.draft.trim().length > 0 && this.status !== "pending";
  }

  /**
   * Submit the current draft. No-ops while a request is pending (the lock
   * guarantees at most one in-flight request) or when the draft is empty.
   */
  async submit(): Promise<PredictionResult | null> {
    if (!this.canSubmit()) {
      return null;
    }
    const lyrics = this.draft;
    this.status = "pending";
    this.lastError = null;
    this.emit();
    try {
      const result = await this.predictFn(lyrics);
      this.lastResult = result;
      this.history.push({
        digest: lyricsDigest(lyrics),
        lyrics,
        result,
        at: Date.now(),
      });
      this.status = "idle";
      this.emit();
      return result;
    } catch (error) {
      this.status = "error";
      if (error instanceof Error && "code" in error) {
        const apiError = error as Error & { code: string };
        this.lastError = { code: apiError.code, message: apiError.message };
      } else {
        this.lastError = { code: "network_error", message: String(error) };
      }
      this.emit();
      return null;
    }
  }

  canCompare(): boolean {
    return this.history.length >= 2;
  }

  compare(indexA: number, indexB: number): ResultDiff {
    const a = this.history[indexA];
    const b = this.history[indexB];
    if (!a || !b) {
      throw new Error(`history indices out of range: ${indexA}, ${indexB}`);
    }
    return diffResults(a.result, b.result);
  }
}
