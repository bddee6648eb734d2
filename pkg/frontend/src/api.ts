/** Thin client for the chat service's JSON API. */

export interface TraceRef {
  source_kind: string;
  id: string;
  score: number;
}

export interface ChatResponse {
  session_id: string;
  answer: string;
  trace: TraceRef[];
  latency_ms: number;
  outcome: string;
}

export interface ChatRequestBody {
  question: string;
  session_id?: string;
  mode: string;
}

export class HttpError extends Error {
  constructor(public status: number, public detail: string) {
    super(`HTTP ${status}: ${detail}`);
  }
}

export type Fetcher = typeof fetch;

export async function postChat(
  body: ChatRequestBody,
  fetcher: Fetcher = fetch,
  baseUrl = "",
): Promise<ChatResponse> {
  let resp: Response;
  try {
    resp = await fetcher(`${baseUrl}/chat`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  } catch (err) {
    throw new HttpError(0, err instanceof Error ? err.message : "network failure");
  }
  if (!resp.ok) {
    let detail = resp.statusText || "request failed";
    try {
      const parsed = await resp.json();
      detail = parsed?.error?.detail ?? detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new HttpError(resp.status, detail);
  }
  return (await resp.json()) as ChatResponse;
}
