/** Session id and chat mode persisted in browser storage. */

const SESSION_KEY = "graphchat.session";
const MODE_KEY = "graphchat.mode";

export const MODES = ["local", "global", "rag", "faq"] as const;
export type Mode = (typeof MODES)[number];
export const DEFAULT_MODE: Mode = "local";

export class SessionState {
  constructor(private storage: Storage = localStorage) {}

  get sessionId(): string | undefined {
    return this.storage.getItem(SESSION_KEY) ?? undefined;
  }

  set sessionId(value: string | undefined) {
    if (value) {
      this.storage.setItem(SESSION_KEY, value);
    } else {
      this.storage.removeItem(SESSION_KEY);
    }
  }

  get mode(): Mode {
    const stored = this.storage.getItem(MODE_KEY);
    return (MODES as readonly string[]).includes(stored ?? "")
      ? (stored as Mode)
      : DEFAULT_MODE;
  }

  set mode(value: Mode) {
    this.storage.setItem(MODE_KEY, value);
  }
}
