// Typed client for the lyriclens prediction API.

export interface GenreResult {
  label: string;
  probs: Record<string, number>;
}

export interface SuccessResult {
  label: string;
  prob_success: number;
}

export interface YearResult {
  raw_estimate: number;
  display_year: number;
}

export interface SentimentResult {
  value: number;
}

export interface PredictionResult {
  genre: GenreResult;
  success: SuccessResult;
  year: YearResult;
  sentiment: SentimentResult;
  model_ids: Record<string, string>;
  checkpoint_id?: string;
  latency_ms: number;
}

export interface HealthResult {
  status: string;
  loaded_models?: Record<string, string>;
  missing?: string[];
}

/** Error carrying the machine-readable code the API returns. */
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let code = "unknown_error";
  let message = `request failed with status ${response.status}`;
  try {
    const body = await response.json();
    if (typeof body.code === "string") code = body.code;
    if (typeof body.message === "string") message = body.message;
  } catch {
    // non-JSON error body: keep the generic message
  }
  return new ApiError(response.status, code, message);
}

export class ApiClient {
  constructor(public baseUrl: string = "") {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  async predict(lyrics: string): Promise<PredictionResult> {
    const response = await fetch(this.url("/api/predict"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ lyrics }),
    });
    if (!response.ok) {
      throw await parseError(response);
    }
    return (await response.json()) as PredictionResult;
  }

  async health(): Promise<HealthResult> {
    const response = await fetch(this.url("/api/health"));
    if (!response.ok) {
      throw await parseError(response);
    }
    return (await response.json()) as HealthResult;
  }
}
