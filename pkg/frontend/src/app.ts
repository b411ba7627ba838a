import { ApiClient, ApiError } from "./api";
import { QueueSession } from "./state";
import { drawCurve, layoutCurve } from "./chart";
import { escapeHtml } from "./format";
import { renderQueue } from "./views/queue";
import { renderConflicts } from "./views/conflicts";
import { renderDashboard } from "./views/dashboard";
import type {
  ConflictsResponse,
  HealthResponse,
  MetricsResponse,
  ServiceConfig,
} from "./types";

type Tab = "queue" | "conflicts" | "dashboard";

const TABS: { id: Tab; label: string }[] = [
  { id: "queue", label: "queue" },
  { id: "conflicts", label: "conflicts" },
  { id: "dashboard", label: "dashboard" },
];

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

function errorText(err: unknown): string {
  if (err instanceof ApiError) return `${err.status}: ${err.message}`;
  if (err instanceof Error) return err.message;
  return String(err);
}

/** Browser controller: owns the fetched state, dispatches clicks and
 * keystrokes, and re-renders the active view. All numbers it shows come
 * straight out of API responses. */
export class App {
  private tab: Tab = "queue";
  private session: QueueSession | null = null;
  private conflictData: ConflictsResponse | null = null;
  private metricsData: MetricsResponse | null = null;
  private configData: ServiceConfig | null = null;
  private healthData: HealthResponse | null = null;
  private notice = "";
  private polling = false;

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private annotatorId: string,
  ) {
    root.addEventListener("click", (ev) => {
      void this.onClick(ev);
    });
    document.addEventListener("keydown", (ev) => {
      void this.onKey(ev);
    });
  }

  async start(): Promise<void> {
    await this.refreshAll();
    this.render();
  }

  /** Pull every surface the views read. The batch is re-fetched too so
   * resolved/conflicted flags stay current; local votes carry over. */
  private async refreshAll(): Promise<void> {
    try {
      this.healthData = await this.api.health();
    } catch (err) {
      this.notice = errorText(err);
      return;
    }
    const results = await Promise.allSettled([
      this.api.metrics(),
      this.api.getConfig(),
      this.api.conflicts(),
    ]);
    if (results[0].status === "fulfilled") this.metricsData = results[0].value;
    if (results[1].status === "fulfilled") this.configData = results[1].value;
    if (results[2].status === "fulfilled") this.conflictData = results[2].value;
    if (this.healthData.model_trained) {
      try {
        const batch = await this.api.nextBatch();
        this.resyncSession(batch.round === this.session?.round ? this.session : null, batch);
      } catch {
        // keep whatever batch we already had; selection may be mid-retrain
      }
    }
  }

  private resyncSession(
    old: QueueSession | null,
    batch: Awaited<ReturnType<ApiClient["nextBatch"]>>,
  ): void {
    const fresh = new QueueSession(batch, this.annotatorId);
    if (old) {
      for (const item of batch.items) {
        const vote = old.voteOn(item.user_id);
        if (vote !== undefined) {
          fresh.accept({
            user_id: item.user_id,
            label: vote,
            annotator_id: this.annotatorId,
          });
        }
      }
    }
    this.session = fresh;
  }

  private async onClick(ev: Event): Promise<void> {
    const target = ev.target instanceof Element ? ev.target : null;
    const el = target?.closest("[data-action]");
    if (!(el instanceof HTMLElement)) return;
    const action = el.getAttribute("data-action");
    if (action === "tab") {
      const tab = el.getAttribute("data-tab");
      if (tab === "queue" || tab === "conflicts" || tab === "dashboard") {
        this.tab = tab;
        this.notice = "";
        this.render();
      }
      return;
    }
    if (action === "label") {
      ev.preventDefault();
      await this.submitLabel(el.getAttribute("data-label") === "1" ? 1 : 0);
      return;
    }
    if (action === "adjudicate") {
      ev.preventDefault();
      const userId = el.getAttribute("data-user");
      if (userId) {
        await this.adjudicate(
          userId,
          el.getAttribute("data-label") === "1" ? 1 : 0,
        );
      }
      return;
    }
    if (action === "apply-config") {
      ev.preventDefault();
      await this.applyConfig();
      return;
    }
    if (action === "refresh") {
      await this.refreshAll();
      this.render();
    }
  }

  private async onKey(ev: KeyboardEvent): Promise<void> {
    if (this.tab !== "queue") return;
    const target = ev.target;
    if (
      target instanceof HTMLInputElement ||
      target instanceof HTMLSelectElement ||
      target instanceof HTMLTextAreaElement
    ) {
      return;
    }
    if (ev.key === "t") await this.submitLabel(1);
    else if (ev.key === "u") await this.submitLabel(0);
  }

  private async submitLabel(label: 0 | 1): Promise<void> {
    if (!this.session) return;
    const row = this.session.rowFor(label);
    if (!row) return;
    try {
      const result = await this.api.submitLabels([row]);
      this.session.accept(row);
      this.notice = "";
      if (result.conflicts.includes(row.user_id)) {
        this.notice = `${row.user_id} has conflicting labels; adjudicate it in the conflicts view`;
        this.conflictData = await this.api.conflicts();
      }
    } catch (err) {
      this.notice = errorText(err);
      if (err instanceof ApiError && err.status === 422) {
        // someone else resolved or conflicted the item under us; resync
        await this.refreshAll();
      }
      this.render();
      return;
    }
    if (this.session.exhausted()) {
      void this.awaitRoundAdvance();
    }
    this.render();
  }

  private async adjudicate(userId: string, label: 0 | 1): Promise<void> {
    try {
      await this.api.adjudicate({
        user_id: userId,
        label,
        annotator_id: this.annotatorId,
      });
      this.notice = `${userId} adjudicated`;
      await this.refreshAll();
    } catch (err) {
      this.notice = errorText(err);
    }
    this.render();
    if (this.session?.exhausted()) {
      void this.awaitRoundAdvance();
    }
  }

  private async applyConfig(): Promise<void> {
    const form = this.root.querySelector('form[data-form="config"]');
    if (!(form instanceof HTMLFormElement)) return;
    const strategy = form.querySelector<HTMLSelectElement>(
      'select[name="strategy"]',
    )?.value;
    const learner = form.querySelector<HTMLSelectElement>(
      'select[name="learner"]',
    )?.value;
    const batchRaw = form.querySelector<HTMLInputElement>(
      'input[name="batch_size"]',
    )?.value;
    const batchSize = batchRaw ? Number(batchRaw) : NaN;
    try {
      this.configData = await this.api.patchConfig({
        ...(strategy ? { strategy } : {}),
        ...(learner ? { learner } : {}),
        ...(Number.isFinite(batchSize) && batchSize >= 1
          ? { batch_size: Math.floor(batchSize) }
          : {}),
      });
      this.notice = "config saved; it applies when the next batch is selected";
    } catch (err) {
      this.notice = errorText(err);
    }
    this.render();
  }

  /** After this annotator finishes a batch, keep polling until the server
   * trains the next round (other annotators may still be voting, or a
   * conflict may need adjudication). The curve growing by one point is the
   * signal that a new round exists. */
  private async awaitRoundAdvance(): Promise<void> {
    if (this.polling) return;
    this.polling = true;
    try {
      for (let i = 0; i < 600; i++) {
        await sleep(1000);
        await this.refreshAll();
        this.render();
        if (this.session && !this.session.exhausted()) break;
      }
    } finally {
      this.polling = false;
    }
    this.render();
  }

  private render(): void {
    const conflictCount = this.conflictData?.items.length ?? 0;
    const nav = TABS.map((t) => {
      const badge =
        t.id === "conflicts" && conflictCount > 0
          ? ` <span class="badge">${conflictCount}</span>`
          : "";
      const cls = t.id === this.tab ? "tab active" : "tab";
      return `<button class="${cls}" data-action="tab" data-tab="${t.id}">${t.label}${badge}</button>`;
    }).join("");
    const noticeHtml = this.notice
      ? `<p class="notice">${escapeHtml(this.notice)}</p>`
      : "";
    let view: string;
    if (this.tab === "queue") {
      view = this.seedPending()
        ? `<p class="empty">seed training pending</p>`
        : renderQueue(this.session);
    } else if (this.tab === "conflicts") {
      view = renderConflicts(this.conflictData);
    } else {
      view = renderDashboard(this.metricsData, this.configData, this.healthData);
    }
    this.root.innerHTML = `
      <header>
        <span class="brand">trustlens annotator</span>
        <nav>${nav}</nav>
        <span class="annotator">you are <strong>${escapeHtml(this.annotatorId)}</strong></span>
        <button class="tab" data-action="refresh">refresh</button>
      </header>
      ${noticeHtml}
      <main>${view}</main>`;
    if (this.tab === "dashboard" && this.metricsData?.model_trained) {
      const curve = this.metricsData.curve;
      if (curve.length > 0) {
        const canvas = this.root.querySelector("#curve-chart");
        if (canvas instanceof HTMLCanvasElement) {
          drawCurve(canvas, layoutCurve(curve));
        }
      }
    }
  }

  private seedPending(): boolean {
    return this.healthData !== null && !this.healthData.model_trained;
  }
}
