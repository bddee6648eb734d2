import { beforeEach, describe, expect, it } from "vitest";

import { ChatApp } from "../src/chat";
import type { ChatResponse } from "../src/api";

interface RecordedRequest {
  url: string;
  body: Record<string, unknown>;
}

/** Stub service: scripted responses in order, records every request body. */
function stubService(responses: Array<Partial<ChatResponse> | { status: number }>) {
  const requests: RecordedRequest[] = [];
  let call = 0;
  const fetcher = (async (url: RequestInfo | URL, init?: RequestInit) => {
    const body = JSON.parse(String(init?.body ?? "{}"));
    requests.push({ url: String(url), body });
    const scripted = responses[Math.min(call, responses.length - 1)];
    call += 1;
    if ("status" in scripted && scripted.status !== undefined && scripted.status >= 400) {
      return new Response(
        JSON.stringify({ error: { type: "not_built", detail: "engine artifacts not loaded" } }),
        { status: scripted.status, headers: { "Content-Type": "application/json" } },
      );
    }
    const payload: ChatResponse = {
      session_id: "s-test",
      answer: "stub answer",
      trace: [],
      latency_ms: 1.2,
      outcome: "answer",
      ...(scripted as Partial<ChatResponse>),
    };
    return new Response(JSON.stringify(payload), {
      status: 200,
      headers: { "Content-Type": "application/json" },
    });
  }) as typeof fetch;
  return { fetcher, requests };
}

function makeApp(responses: Array<Partial<ChatResponse> | { status: number }>) {
  const root = document.createElement("div");
  document.body.appendChild(root);
  const { fetcher, requests } = stubService(responses);
  const app = new ChatApp(root, { fetcher, storage: window.localStorage });
  return { app, root, requests };
}

beforeEach(() => {
  document.body.innerHTML = "";
  window.localStorage.clear();
});

describe("ChatApp", () => {
  it("renders user and assistant bubbles after a round trip", async () => {
    const { app, root } = makeApp([{ answer: "hello from the engine" }]);
    app.input.value = "what is a reservoir?";
    await app.send();
    const bubbles = root.querySelectorAll(".message");
    expect(bubbles).toHaveLength(2);
    expect(bubbles[0].classList.contains("user")).toBe(true);
    expect(bubbles[0].textContent).toContain("what is a reservoir?");
    expect(bubbles[1].classList.contains("assistant")).toBe(true);
    expect(bubbles[1].classList.contains("pending")).toBe(false);
    expect(bubbles[1].textContent).toContain("hello from the engine");
  });

  it("renders fenced code in the answer as a code block", async () => {
    const { app, root } = makeApp([
      { answer: "Sure:\n\n```python\nreservoir = Reservoir(100)\n```" },
    ]);
    app.input.value = "code me a reservoir";
    await app.send();
    const code = root.querySelector(".message.assistant pre code");
    expect(code).not.toBeNull();
    expect(code!.textContent).toContain("Reservoir(100)");
    expect(root.querySelector(".message.assistant .copy-btn")).not.toBeNull();
  });

  it("replaces the pending bubble with a retryable error on 503 and keeps the input", async () => {
    const { app, root } = makeApp([{ status: 503 }, { answer: "recovered" }]);
    app.input.value = "will this fail?";
    await app.send();

    const error = root.querySelector(".message.error");
    expect(error).not.toBeNull();
    expect(root.querySelector(".message.pending")).toBeNull();
    expect(error!.querySelector(".retry-btn")).not.toBeNull();
    // the question is preserved for the user
    expect(app.input.value).toBe("will this fail?");

    (error!.querySelector(".retry-btn") as HTMLButtonElement).click();
    await new Promise((resolve) => setTimeout(resolve, 0));
    expect(root.querySelector(".message.error")).toBeNull();
    expect(root.textContent).toContain("recovered");
    // order: user bubble first, then the resolved assistant bubble
    const bubbles = root.querySelectorAll(".message");
    expect(bubbles[0].classList.contains("user")).toBe(true);
    expect(bubbles[1].classList.contains("assistant")).toBe(true);
  });

  it("sends the selected mode in the request body", async () => {
    const { app, requests } = makeApp([{}, {}]);
    app.input.value = "first";
    await app.send();
    expect(requests[0].body.mode).toBe("local");

    app.modeSelect.value = "global";
    app.modeSelect.dispatchEvent(new Event("change"));
    app.input.value = "second";
    await app.send();
    expect(requests[1].body.mode).toBe("global");
  });

  it("defaults to local mode on a fresh tab and persists changes", () => {
    const { app } = makeApp([{}]);
    expect(app.mode).toBe("local");
    app.modeSelect.value = "rag";
    app.modeSelect.dispatchEvent(new Event("change"));
    expect(window.localStorage.getItem("graphchat.mode")).toBe("rag");
  });

  it("keeps the session id across requests", async () => {
    const { app, requests } = makeApp([{ session_id: "s-42" }, { session_id: "s-42" }]);
    app.input.value = "first";
    await app.send();
    expect(requests[0].body.session_id).toBeUndefined();
    app.input.value = "second";
    await app.send();
    expect(requests[1].body.session_id).toBe("s-42");
  });

  it("disables input while a request is pending", async () => {
    let release: (value: Response) => void = () => {};
    const gated = new Promise<Response>((resolve) => (release = resolve));
    const fetcher = (async () => gated) as typeof fetch;
    const root = document.createElement("div");
    document.body.appendChild(root);
    const app = new ChatApp(root, { fetcher, storage: window.localStorage });

    app.input.value = "slow question";
    const sending = app.send();
    expect(app.input.disabled).toBe(true);
    expect(root.querySelector(".message.pending")).not.toBeNull();

    release(
      new Response(
        JSON.stringify({
          session_id: "s",
          answer: "done",
          trace: [],
          latency_ms: 1,
          outcome: "answer",
        }),
        { status: 200, headers: { "Content-Type": "application/json" } },
      ),
    );
    await sending;
    expect(app.input.disabled).toBe(false);
    expect(root.querySelector(".message.pending")).toBeNull();
  });

  it("shows a collapsed trace that expands on toggle", async () => {
    const { app, root } = makeApp([
      {
        answer: "traced",
        trace: [{ source_kind: "entity", id: "RESERVOIR", score: 0.91 }],
      },
    ]);
    app.input.value = "with sources";
    await app.send();
    const list = root.querySelector(".trace")!;
    expect(list.classList.contains("hidden")).toBe(true);
    (root.querySelector(".trace-toggle") as HTMLButtonElement).click();
    expect(list.classList.contains("hidden")).toBe(false);
    expect(list.textContent).toContain("RESERVOIR");
  });

  it("ignores empty input", async () => {
    const { app, root, requests } = makeApp([{}]);
    app.input.value = "   ";
    await app.send();
    expect(root.querySelectorAll(".message")).toHaveLength(0);
    expect(requests).toHaveLength(0);
  });

  it("never reorders messages across multiple sends", async () => {
    const { app, root } = makeApp([{ answer: "a1" }, { answer: "a2" }]);
    app.input.value = "q1";
    await app.send();
    app.input.value = "q2";
    await app.send();
    const texts = [...root.querySelectorAll(".message .content")].map((el) =>
      el.textContent?.trim(),
    );
    expect(texts).toEqual(["q1", "a1", "q2", "a2"]);
  });
});
