/** Chat pane: message bubbles, mode selector, trace toggles, retry flow.
 *
 * One in-flight request per tab; the input is disabled while a reply is
 * pending, and a failed request always leaves the question text intact.
 */

import { ChatResponse, Fetcher, HttpError, postChat, TraceRef } from "./api.js";
import { renderMarkdown } from "./markdown.js";
import { DEFAULT_MODE, Mode, MODES, SessionState } from "./session.js";

export interface ChatOptions {
  fetcher?: Fetcher;
  storage?: Storage;
  baseUrl?: string;
}

export class ChatApp {
  readonly messages: HTMLElement;
  readonly input: HTMLInputElement;
  readonly sendButton: HTMLButtonElement;
  readonly modeSelect: HTMLSelectElement;
  private readonly session: SessionState;
  private pending = false;

  constructor(readonly root: HTMLElement, private readonly opts: ChatOptions = {}) {
    this.session = new SessionState(opts.storage ?? localStorage);
    root.classList.add("chat");
    root.innerHTML = "";

    const header = document.createElement("header");
    const label = document.createElement("label");
    label.textContent = "Mode ";
    this.modeSelect = document.createElement("select");
    this.modeSelect.className = "mode-select";
    for (const mode of MODES) {
      const option = document.createElement("option");
      option.value = mode;
      option.textContent = mode;
      this.modeSelect.appendChild(option);
    }
    this.modeSelect.value = this.session.mode ?? DEFAULT_MODE;
    this.modeSelect.addEventListener("change", () => {
      this.session.mode = this.modeSelect.value as Mode;
    });
    label.appendChild(this.modeSelect);
    header.appendChild(label);

    this.messages = document.createElement("div");
    this.messages.className = "messages";

    const form = document.createElement("form");
    form.className = "composer";
    this.input = document.createElement("input");
    this.input.type = "text";
    this.input.placeholder = "Ask about the documentation...";
    this.sendButton = document.createElement("button");
    this.sendButton.type = "submit";
    this.sendButton.textContent = "Send";
    form.appendChild(this.input);
    form.appendChild(this.sendButton);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.send();
    });

    root.appendChild(header);
    root.appendChild(this.messages);
    root.appendChild(form);
  }

  get mode(): Mode {
    return this.modeSelect.value as Mode;
  }

  private setPending(value: boolean): void {
    this.pending = value;
    this.input.disabled = value;
    this.sendButton.disabled = value;
  }

  private bubble(className: string): HTMLElement {
    const el = document.createElement("div");
    el.className = `message ${className}`;
    return el;
  }

  private userBubble(question: string): HTMLElement {
    const el = this.bubble("user");
    const content = document.createElement("div");
    content.className = "content";
    content.textContent = question;
    el.appendChild(content);
    return el;
  }

  private pendingBubble(): HTMLElement {
    const el = this.bubble("assistant pending");
    const content = document.createElement("div");
    content.className = "content";
    content.textContent = "…";
    el.appendChild(content);
    return el;
  }

  private assistantBubble(resp: ChatResponse): HTMLElement {
    const el = this.bubble("assistant");
    const content = document.createElement("div");
    content.className = "content";
    content.appendChild(renderMarkdown(resp.answer));
    el.appendChild(content);
    if (resp.trace.length > 0) {
      el.appendChild(this.traceBlock(resp.trace));
    }
    return el;
  }

  private traceBlock(trace: TraceRef[]): HTMLElement {
    const wrapper = document.createElement("div");
    wrapper.className = "trace-wrapper";
    const toggle = document.createElement("button");
    toggle.type = "button";
    toggle.className = "trace-toggle";
    toggle.textContent = `Sources (${trace.length})`;
    const list = document.createElement("ul");
    list.className = "trace hidden";
    for (const ref of trace) {
      const item = document.createElement("li");
      item.textContent = `${ref.source_kind} ${ref.id} (${ref.score.toFixed(3)})`;
      list.appendChild(item);
    }
    toggle.addEventListener("click", () => list.classList.toggle("hidden"));
    wrapper.appendChild(toggle);
    wrapper.appendChild(list);
    return wrapper;
  }

  private errorBubble(question: string, error: unknown): HTMLElement {
    const el = this.bubble("error");
    const content = document.createElement("div");
    content.className = "content";
    const status = error instanceof HttpError ? error.status : 0;
    const detail = error instanceof Error ? error.message : String(error);
    content.textContent =
      status > 0 ? `Request failed (${detail})` : `Network error (${detail})`;
    const retry = document.createElement("button");
    retry.type = "button";
    retry.className = "retry-btn";
    retry.textContent = "Retry";
    retry.addEventListener("click", () => {
      if (this.pending) {
        return;
      }
      const fresh = this.pendingBubble();
      el.replaceWith(fresh);
      this.setPending(true);
      if (this.input.value.trim() === question) {
        this.input.value = "";
      }
      void this.resolveInto(fresh, question).finally(() => this.setPending(false));
    });
    el.appendChild(content);
    el.appendChild(retry);
    return el;
  }

  private async resolveInto(bubble: HTMLElement, question: string): Promise<void> {
    try {
      const resp = await postChat(
        { question, session_id: this.session.sessionId, mode: this.mode },
        this.opts.fetcher ?? fetch,
        this.opts.baseUrl ?? "",
      );
      this.session.sessionId = resp.session_id;
      bubble.replaceWith(this.assistantBubble(resp));
    } catch (error) {
      bubble.replaceWith(this.errorBubble(question, error));
      // the question is never lost on failure
      this.input.value = question;
    }
  }

  async send(): Promise<void> {
    const question = this.input.value.trim();
    if (!question || this.pending) {
      return;
    }
    this.messages.appendChild(this.userBubble(question));
    const pending = this.pendingBubble();
    this.messages.appendChild(pending);
    this.setPending(true);
    this.input.value = "";
    try {
      await this.resolveInto(pending, question);
    } finally {
      this.setPending(false);
      this.input.focus();
    }
  }
}
