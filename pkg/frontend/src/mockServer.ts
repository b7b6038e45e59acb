// In-memory stand-in for the prediction service, used by the tests.
// Implements the documented API contract at the fetch boundary.

import type { PredictionResult } from "./api.js";

export const FIXTURE_RESULT: PredictionResult = {
  genre: {
    label: "rap",
    probs: { country: 0.04, pop: 0.18, rap: 0.62, rb: 0.06, rock: 0.1 },
  },
  success: { label: "success", prob_success: 0.734 },
  year: { raw_estimate: 2004.6, display_year: 2005 },
  sentiment: { value: -0.21 },
  model_ids: { genre: "genre-abc", success: "success-def", year: "year-svr-123" },
  checkpoint_id: "fixturecafe0001",
  latency_ms: 12.5,
};

export const ALTERNATE_RESULT: PredictionResult = {
  ...FIXTURE_RESULT,
  genre: {
    label: "pop",
    probs: { country: 0.05, pop: 0.5, rap: 0.25, rb: 0.08, rock: 0.12 },
  },
  success: { label: "fail", prob_success: 0.41 },
  year: { raw_estimate: 1998.2, display_year: 1998 },
  sentiment: { value: 0.33 },
};

export interface MockServerOptions {
  result?: PredictionResult;
  resultFor?: (lyrics: string) => PredictionResult;
  unavailable?: boolean;
  /** resolve responses manually; each pending request waits for release() */
  deferred?: boolean;
}

export interface MockServer {
  fetch: typeof fetch;
  calls: { path: string; body: unknown }[];
  release: () => void;
}

function cleanedLength(lyrics: string): number {
  return lyrics
    .replace(/\[[^\]\n]*\]/g, " ")
    .replace(/\s+/g, " ")
    .trim().length;
}

function json(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

export function mockServer(options: MockServerOptions = {}): MockServer {
  const calls: { path: string; body: unknown }[] = [];
  let pendingReleases: Array<() => void> = [];

  const handler = async (input: RequestInfo | URL, init?: RequestInit): Promise<Response> => {
    const url = typeof input === "string" ? input : input instanceof URL ? input.href : input.url;
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    calls.push({ path, body });

    if (options.deferred) {
      await new Promise<void>((resolve) => pendingReleases.push(resolve));
    }

    if (path === "/api/health") {
      if (options.unavailable) {
        return json(503, { code: "model_unavailable", message: "missing artifacts", missing: ["year"] });
      }
      return json(200, { status: "ok", loaded_models: FIXTURE_RESULT.model_ids });
    }
    if (path === "/api/predict") {
      if (options.unavailable) {
        return json(503, { code: "model_unavailable", message: "missing artifacts: ['year']", missing: ["year"] });
      }
      const lyrics = (body as { lyrics?: unknown })?.lyrics;
      if (typeof lyrics !== "string") {
        return json(422, { code: "invalid_request", message: "bad body" });
      }
      if (cleanedLength(lyrics) === 0) {
        return json(422, { code: "no_content", message: "lyrics are empty after cleaning" });
      }
      const result = options.resultFor ? options.resultFor(lyrics) : options.result ?? FIXTURE_RESULT;
      return json(200, result);
    }
    return json(404, { code: "not_found", message: path });
  };

  return {
    fetch: handler as typeof fetch,
    calls,
    release: () => {
      const releases = pendingReleases;
      pendingReleases = [];
      for (const release of releases) release();
    },
  };
}
