import { ApiClient, ApiError } from "./api.js";
import { LedgerStream } from "./sse.js";
import { CHECKABLE, fetchSnapshot, type ProjectSnapshot } from "./snapshot.js";
import { fallbackPanel, type Panel } from "./state.js";
import { renderPage, type PageView } from "./render/page.js";
import type { PendingTurn } from "./render/dialog.js";
import type { Criterion, RefinementOp } from "./types.js";

export interface ConsoleOptions {
  panel?: Panel;
  stream?: boolean;
  onPanelChange?: (panel: Panel) => void;
}

/**
 * Wires one project's page to the API: renders from a snapshot, turns
 * DOM events into requests, and folds ledger stream events back in.
 * All truth lives on the server; this class only caches the last
 * snapshot it fetched.
 */
export class ConsoleController {
  private snapshot: ProjectSnapshot | null = null;
  private panel: Panel;
  private pending: PendingTurn[] = [];
  private editing: string | null = null;
  private rowErrors: Record<string, string> = {};
  private banner: string | null = null;
  private syntaxError: { line: number; expected: string } | null = null;
  private streamState: "open" | "retrying" | "stopped" | "off" = "off";
  private busy = false;
  private stream: LedgerStream | null = null;
  private inflight = new Set<Promise<unknown>>();
  private refreshQueued = false;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    private readonly projectId: string,
    private readonly options: ConsoleOptions = {},
  ) {
    this.panel = options.panel ?? "dialog";
    root.addEventListener("click", (event) => this.onClick(event));
    root.addEventListener("submit", (event) => this.onSubmit(event));
    root.addEventListener("change", (event) => this.onChange(event));
  }

  async open(): Promise<void> {
    await this.refresh();
    if (this.options.stream !== false) {
      this.stream = new LedgerStream(this.api.baseUrl, this.projectId, {
        since: this.snapshot?.status.ledger_length ?? 0,
        onEntry: () => this.queueRefresh(),
        onState: (state) => {
          this.streamState = state;
          this.render();
        },
      });
    }
  }

  dispose(): void {
    this.stream?.stop();
  }

  /** Resolves once every in-flight request this controller started is done. */
  async idle(): Promise<void> {
    while (this.inflight.size > 0) {
      await Promise.allSettled([...this.inflight]);
    }
  }

  async refresh(): Promise<void> {
    const snapshot = await fetchSnapshot(this.api, this.projectId);
    this.snapshot = snapshot;
    this.panel = fallbackPanel(snapshot.status, this.panel);
    this.render();
  }

  get currentPanel(): Panel {
    return this.panel;
  }

  openPanel(panel: Panel): void {
    this.panel = panel;
    this.options.onPanelChange?.(panel);
    this.render();
  }

  render(): void {
    if (!this.snapshot) return;
    const view: PageView = {
      snapshot: this.snapshot,
      panel: this.panel,
      pending: this.pending,
      editing: this.editing,
      rowErrors: this.rowErrors,
      banner: this.banner,
      syntaxError: this.syntaxError,
      streamState: this.streamState,
      busy: this.busy,
    };
    this.root.innerHTML = renderPage(view);
  }

  /** Render the page for the current state without touching the DOM. */
  renderToString(): string {
    if (!this.snapshot) throw new Error("no snapshot loaded");
    return renderPage({
      snapshot: this.snapshot,
      panel: this.panel,
      pending: this.pending,
      editing: this.editing,
      rowErrors: this.rowErrors,
      banner: this.banner,
      syntaxError: this.syntaxError,
      streamState: this.streamState,
      busy: this.busy,
    });
  }

  private queueRefresh(): void {
    // Ledger events arrive in bursts, one refetch covers all of them.
    if (this.refreshQueued) return;
    this.refreshQueued = true;
    this.track(
      (async () => {
        await Promise.resolve();
        this.refreshQueued = false;
        await this.refresh();
      })(),
    );
  }

  private track<T>(work: Promise<T>): Promise<T> {
    this.inflight.add(work);
    void work.finally(() => this.inflight.delete(work)).catch(() => {});
    return work;
  }

  private run(action: () => Promise<void>): void {
    this.busy = true;
    this.render();
    this.track(
      action()
        .catch((error) => this.surface(error))
        .finally(() => {
          this.busy = false;
          this.render();
        }),
    );
  }

  private surface(error: unknown): void {
    if (error instanceof ApiError) {
      const detail = error.detail as { asr_id?: string } | undefined;
      if (error.code === "invariant_violation" && detail?.asr_id) {
        this.rowErrors = { ...this.rowErrors, [detail.asr_id]: error.message };
        return;
      }
      if (error.code === "syntax_error") {
        const att = error.detail as { line: number; expected: string };
        this.syntaxError = att;
        return;
      }
      this.banner = `${error.code}: ${error.message}`;
      return;
    }
    this.banner = error instanceof Error ? error.message : String(error);
  }

  private onClick(event: Event): void {
    const target = (event.target as HTMLElement).closest<HTMLElement>(
      "[data-action]",
    );
    if (!target) return;
    const action = target.dataset.action;
    if (action === "open-panel") {
      this.openPanel(target.dataset.panel as Panel);
    } else if (action === "dismiss-banner") {
      this.banner = null;
      this.render();
    } else if (action === "analyze") {
      this.run(async () => {
        await this.api.analyze(this.projectId);
        await this.refresh();
      });
    } else if (action === "edit-asr") {
      this.editing = target.dataset.asrId ?? null;
      this.render();
    } else if (action === "cancel-edit") {
      this.editing = null;
      this.render();
    } else if (action === "remove-asr") {
      const asrId = target.dataset.asrId!;
      this.run(async () => {
        await this.api.refine(this.projectId, { op: "remove", target: asrId });
        await this.refresh();
      });
    } else if (action === "add-asr") {
      this.editing = "+new";
      this.render();
    } else if (action === "recheck") {
      const check = target.dataset.check!;
      const element = target.dataset.element!;
      this.run(async () => {
        const result = await this.api.check(this.projectId, check, element);
        if (this.snapshot) {
          this.snapshot.checks = this.snapshot.checks.map((entry) =>
            entry.check === check && entry.element === element
              ? result
              : entry,
          );
        }
      });
    } else if (action === "synthesize") {
      const kind = target.dataset.kind ?? "class_diagram";
      this.run(async () => {
        this.syntaxError = null;
        await this.api.synthesize(this.projectId, kind);
        await this.refresh();
      });
    } else if (action === "evaluate") {
      this.run(async () => {
        await this.api.evaluate(this.projectId);
        await this.refresh();
      });
    } else if (action === "elicit") {
      this.openPanel("evaluation");
      this.root
        .querySelector<HTMLInputElement>(".elicit-form input[name=focus]")
        ?.focus();
    }
  }

  private onChange(event: Event): void {
    const select = event.target as HTMLElement;
    if (select.dataset?.action !== "select-revision") return;
    const revisionId = (select as HTMLSelectElement).value;
    this.run(async () => {
      const model = await this.api.modelRevision(this.projectId, revisionId);
      if (this.snapshot) {
        this.snapshot.model = model;
        this.snapshot.checks = [];
      }
      await this.recheckAll(model);
    });
  }

  private async recheckAll(
    model: NonNullable<ProjectSnapshot["model"]>,
  ): Promise<void> {
    const results = [];
    for (const element of model.graph.elements) {
      for (const annotation of element.annotations) {
        if (CHECKABLE.includes(annotation.key)) {
          results.push(
            await this.api.check(this.projectId, annotation.key, element.name),
          );
        }
      }
    }
    if (this.snapshot) this.snapshot.checks = results;
  }

  private onSubmit(event: Event): void {
    const form = event.target as HTMLFormElement;
    event.preventDefault();
    const action = form.dataset.action;
    if (action === "freeform") {
      this.submitFreeform(form);
    } else if (action === "import-story") {
      this.importStory(form);
    } else if (action === "save-asr") {
      this.saveAsr(form);
    } else if (action === "save-new-asr") {
      this.saveNewAsr(form);
    } else if (action === "accept") {
      this.acceptChecked(form);
    } else if (action === "elicit-scenarios") {
      const focus = fieldValue(form, "focus").trim();
      this.run(async () => {
        await this.api.elicitScenarios(this.projectId, focus || null);
        await this.refresh();
      });
    }
  }

  private importStory(form: HTMLFormElement): void {
    const narrative = fieldValue(form, "narrative").trim();
    if (!narrative) return;
    const scenarios = fieldValue(form, "scenarios")
      .split("\n")
      .map((line) => line.trim())
      .filter(Boolean)
      .map((line) => {
        const colon = line.indexOf(":");
        return colon < 0
          ? { title: line, description: "" }
          : {
              title: line.slice(0, colon).trim(),
              description: line.slice(colon + 1).trim(),
            };
      });
    const tags = fieldValue(form, "tags")
      .split(",")
      .map((t) => t.trim())
      .filter(Boolean);
    this.run(async () => {
      await this.api.importStory(this.projectId, {
        id: this.projectId,
        narrative,
        scenarios,
        domain_tags: tags,
      });
      await this.refresh();
    });
  }

  private submitFreeform(form: HTMLFormElement): void {
    const content = fieldValue(form, "content").trim();
    if (!content) return;
    const pendingTurn: PendingTurn = { content };
    this.pending = [...this.pending, pendingTurn];
    this.run(async () => {
      try {
        await this.api.freeform(this.projectId, content);
        await this.refresh();
      } finally {
        // Whether the turn landed or failed, the optimistic copy gives
        // way to whatever the server now reports.
        this.pending = this.pending.filter((turn) => turn !== pendingTurn);
      }
    });
  }

  private saveAsr(form: HTMLFormElement): void {
    const asrId = form.dataset.asrId!;
    const statement = fieldValue(form, "statement").trim();
    const metric = fieldValue(form, "metric").trim();
    const rawValue = fieldValue(form, "value").trim();
    const comparator = fieldValue(form, "comparator") as Criterion["comparator"];
    const tags = fieldValue(form, "tags")
      .split(",")
      .map((t) => t.trim())
      .filter(Boolean);

    const previous = this.snapshot?.asrs.find((a) => a.id === asrId);
    const payload: NonNullable<RefinementOp["payload"]> = {};
    if (statement && statement !== previous?.statement) {
      payload.statement = statement;
    }
    if (metric && rawValue !== "") {
      payload.criterion = { metric, comparator, value: Number(rawValue) };
    } else if (previous?.criterion) {
      payload.criterion = null;
    }
    if (tags.join(",") !== (previous?.tags ?? []).join(",")) {
      payload.tags = tags;
    }
    if (Object.keys(payload).length === 0) {
      this.editing = null;
      this.render();
      return;
    }
    this.run(async () => {
      delete this.rowErrors[asrId];
      await this.api.refine(this.projectId, {
        op: "update",
        target: asrId,
        payload,
      });
      this.editing = null;
      await this.refresh();
    });
  }

  private saveNewAsr(form: HTMLFormElement): void {
    const statement = fieldValue(form, "statement").trim();
    if (!statement) return;
    const kind = fieldValue(form, "kind") as "functionality" | "quality" | "constraint";
    const tags = fieldValue(form, "tags")
      .split(",")
      .map((t) => t.trim())
      .filter(Boolean);
    this.run(async () => {
      await this.api.refine(this.projectId, {
        op: "add",
        payload: { kind, statement, ...(tags.length > 0 ? { tags } : {}) },
      });
      this.editing = null;
      await this.refresh();
    });
  }

  private acceptChecked(form: HTMLFormElement): void {
    const ids = [
      ...form.querySelectorAll<HTMLInputElement>(
        "input[name=accept]:checked",
      ),
    ].map((box) => box.value);
    if (ids.length === 0) return;
    this.run(async () => {
      this.rowErrors = {};
      await this.api.accept(this.projectId, ids);
      await this.refresh();
    });
  }
}

function fieldValue(form: HTMLFormElement, name: string): string {
  const field = form.elements.namedItem(name);
  if (
    field instanceof HTMLInputElement ||
    field instanceof HTMLTextAreaElement ||
    field instanceof HTMLSelectElement
  ) {
    return field.value;
  }
  return "";
}
