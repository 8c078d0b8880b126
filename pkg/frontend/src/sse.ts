// Server-sent-events reader over fetch streaming. EventSource is not
// available under node, and fetch works in both places, so the console
// uses this reader everywhere.

import type { FetchLike } from "./api.js";
import type { LedgerEntry } from "./types.js";

export interface SseFrame {
  id: string | null;
  event: string;
  data: string;
}

/** Incremental SSE frame parser; feed it chunks, it emits complete frames. */
export class SseParser {
  private buffer = "";
  private id: string | null = null;
  private event = "";
  private data: string[] = [];

  push(chunk: string): SseFrame[] {
    this.buffer += chunk;
    const frames: SseFrame[] = [];
    let index: number;
    while ((index = this.buffer.indexOf("\n")) >= 0) {
      const line = this.buffer.slice(0, index).replace(/\r$/, "");
      this.buffer = this.buffer.slice(index + 1);
      if (line === "") {
        if (this.data.length > 0) {
          frames.push({
            id: this.id,
            event: this.event || "message",
            data: this.data.join("\n"),
          });
        }
        this.id = null;
        this.event = "";
        this.data = [];
      } else if (!line.startsWith(":")) {
        const colon = line.indexOf(":");
        const field = colon < 0 ? line : line.slice(0, colon);
        let value = colon < 0 ? "" : line.slice(colon + 1);
        if (value.startsWith(" ")) value = value.slice(1);
        if (field === "id") this.id = value;
        else if (field === "event") this.event = value;
        else if (field === "data") this.data.push(value);
      }
    }
    return frames;
  }
}

export interface LedgerStreamOptions {
  since?: number;
  fetchFn?: FetchLike;
  onEntry: (entry: LedgerEntry) => void;
  onState?: (state: "open" | "retrying" | "stopped") => void;
  retryMs?: number;
}

/**
 * Follow a project's ledger stream, resuming from the last delivered
 * sequence number across reconnects. One subscription per open project.
 */
export class LedgerStream {
  private nextSeq: number;
  private controller: AbortController | null = null;
  private stopped = false;
  readonly done: Promise<void>;

  constructor(
    private readonly baseUrl: string,
    private readonly projectId: string,
    private readonly options: LedgerStreamOptions,
  ) {
    this.nextSeq = options.since ?? 0;
    this.done = this.run();
  }

  stop(): void {
    this.stopped = true;
    this.controller?.abort();
  }

  private async run(): Promise<void> {
    const fetchFn =
      this.options.fetchFn ?? ((input, init) => fetch(input, init));
    while (!this.stopped) {
      this.controller = new AbortController();
      try {
        const url =
          `${this.baseUrl}/projects/${this.projectId}/events` +
          `?since=${this.nextSeq}`;
        const response = await fetchFn(url, {
          signal: this.controller.signal,
          headers: { accept: "text/event-stream" },
        });
        if (!response.ok || response.body === null) {
          throw new Error(`event stream replied ${response.status}`);
        }
        this.options.onState?.("open");
        const parser = new SseParser();
        const decoder = new TextDecoder();
        for await (const chunk of streamChunks(response.body)) {
          for (const frame of parser.push(decoder.decode(chunk, { stream: true }))) {
            if (frame.event !== "ledger") continue;
            const entry = JSON.parse(frame.data) as LedgerEntry;
            this.nextSeq = entry.seq;
            this.options.onEntry(entry);
          }
        }
      } catch {
        // Dropped connections land here; aborts fall through to the
        // stopped check below.
      }
      if (this.stopped) break;
      this.options.onState?.("retrying");
      await sleep(this.options.retryMs ?? 1000);
    }
    this.options.onState?.("stopped");
  }
}

async function* streamChunks(
  body: ReadableStream<Uint8Array>,
): AsyncIterable<Uint8Array> {
  const reader = body.getReader();
  try {
    for (;;) {
      const { done, value } = await reader.read();
      if (done) return;
      if (value) yield value;
    }
  } finally {
    reader.releaseLock();
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
