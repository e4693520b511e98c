/** The assessor review console: a job queue of essays awaiting review and a
 * per-dimension editor with score overrides, feedback editing, live final
 * score display, approval, and report retrieval.
 *
 * Rendering is plain DOM so the whole console can be driven by scripted
 * tests; all state mutations go through the HTTP API. */

import { ApiClient, ApiError, ConnectionError } from "./api.js";
import type { FetchLike, JobView } from "./api.js";
import { Frac } from "./fraction.js";
import {
  EditBuffer,
  WeightMap,
  buildWeights,
  bufferFromServer,
  canEdit,
  dimensionIds,
  displayedFinal,
  editsPayload,
  reconcile,
} from "./model.js";

export interface ConsoleConfig {
  baseUrl: string;
  /** Display weights per dimension as fraction strings; uniform when absent.
   * The server's aggregate remains authoritative either way. */
  weights?: Record<string, string>;
  fetchFn?: FetchLike;
  pageSize?: number;
}

const SCORE_CHOICES = [0, 1, 2];

export class ReviewConsole {
  readonly client: ApiClient;
  lastReport: string | null = null;

  private readonly root: HTMLElement;
  private readonly doc: Document;
  private readonly config: ConsoleConfig;
  private job: JobView | null = null;
  private buffer: EditBuffer = new Map();
  private weights: WeightMap = new Map();
  private offset = 0;

  constructor(root: HTMLElement, config: ConsoleConfig) {
    this.root = root;
    this.doc = root.ownerDocument;
    this.config = config;
    this.client = new ApiClient(config.baseUrl, config.fetchFn);
  }

  // --- queue -----------------------------------------------------------------

  async showQueue(): Promise<void> {
    this.job = null;
    const pageSize = this.config.pageSize ?? 50;
    let listing;
    try {
      listing = await this.client.listJobs("awaiting_review", pageSize, this.offset);
    } catch (exc) {
      this.renderShell("queue");
      this.banner("error", this.describe(exc), { label: "retry", action: () => this.showQueue() });
      return;
    }
    this.renderShell("queue");
    const section = this.section();

    const heading = this.el("h1", "Jobs awaiting review");
    section.append(heading);

    if (listing.jobs.length === 0) {
      const empty = this.el("p", "No jobs are waiting for review.");
      empty.id = "empty-state";
      section.append(empty);
      return;
    }

    const table = this.doc.createElement("table");
    table.id = "queue-table";
    const head = this.doc.createElement("tr");
    for (const title of ["job", "customer", "essay", "received", ""]) {
      head.append(this.el("th", title));
    }
    table.append(head);
    for (const job of listing.jobs) {
      const row = this.doc.createElement("tr");
      row.className = "queue-row";
      row.dataset.jobId = job.job_id;
      row.append(this.el("td", job.job_id));
      row.append(this.el("td", job.customer_name));
      row.append(this.el("td", job.essay_id));
      row.append(this.el("td", job.created_at));
      const cell = this.doc.createElement("td");
      const open = this.el("button", "open") as HTMLButtonElement;
      open.className = "open-job";
      open.addEventListener("click", () => void this.openJob(job.job_id));
      cell.append(open);
      row.append(cell);
      table.append(row);
    }
    section.append(table);

    const pager = this.doc.createElement("p");
    pager.id = "pager";
    pager.append(this.el("span", `${listing.total} job(s) pending`));
    if (this.offset > 0) {
      const prev = this.el("button", "newer") as HTMLButtonElement;
      prev.id = "page-prev";
      prev.addEventListener("click", () => {
        this.offset = Math.max(0, this.offset - pageSize);
        void this.showQueue();
      });
      pager.append(prev);
    }
    if (this.offset + pageSize < listing.total) {
      const next = this.el("button", "older") as HTMLButtonElement;
      next.id = "page-next";
      next.addEventListener("click", () => {
        this.offset += pageSize;
        void this.showQueue();
      });
      pager.append(next);
    }
    section.append(pager);
  }

  // --- editor ----------------------------------------------------------------

  async openJob(jobId: string): Promise<void> {
    let job;
    try {
      job = await this.client.getJob(jobId);
    } catch (exc) {
      this.renderShell("editor");
      this.banner("error", this.describe(exc), { label: "retry", action: () => this.openJob(jobId) });
      return;
    }
    this.job = job;
    if (job.master !== null) {
      const dims = dimensionIds(job.master);
      this.weights = buildWeights(dims, this.config.weights);
      this.buffer = bufferFromServer(dims, job.review_edits);
    } else {
      this.weights = new Map();
      this.buffer = new Map();
    }
    this.renderEditor();
  }

  private renderEditor(): void {
    const job = this.job;
    if (job === null) {
      return;
    }
    this.renderShell("editor");
    const section = this.section();
    const editable = canEdit(job.state);

    section.append(this.el("h1", `Review ${job.job_id}`));
    const state = this.el("p", `state: ${job.state}`);
    state.id = "editor-state";
    state.dataset.state = job.state;
    section.append(state);
    section.append(
      this.el("p", `essay ${job.essay.essay_id} from ${job.essay.customer_name}`),
    );

    const back = this.el("button", "back to queue") as HTMLButtonElement;
    back.id = "back-to-queue";
    back.addEventListener("click", () => void this.showQueue());
    section.append(back);

    if (job.state === "FAILED") {
      section.append(this.el("p", `failure: ${job.failure_cause ?? "unknown"}`));
      return;
    }
    if (job.master === null) {
      section.append(this.el("p", "Scoring has not finished yet."));
      return;
    }

    const table = this.doc.createElement("table");
    table.id = "dimension-table";
    const head = this.doc.createElement("tr");
    for (const title of ["dimension", "machine score", "shown score", "confidence", "feedback"]) {
      head.append(this.el("th", title));
    }
    table.append(head);

    for (const dim of dimensionIds(job.master)) {
      const result = job.master.results[dim];
      const edit = this.buffer.get(dim)!;
      const row = this.doc.createElement("tr");
      row.className = "dim-row";
      row.dataset.dim = dim;

      row.append(this.el("td", dim));
      const machine = this.el("td", String(result.score));
      machine.className = "machine-score";
      row.append(machine);

      const scoreCell = this.doc.createElement("td");
      const select = this.doc.createElement("select") as HTMLSelectElement;
      select.className = "score-select";
      select.disabled = !editable;
      const keep = this.doc.createElement("option");
      keep.value = "";
      keep.textContent = `machine (${result.score})`;
      select.append(keep);
      for (const value of SCORE_CHOICES) {
        const option = this.doc.createElement("option");
        option.value = String(value);
        option.textContent = String(value);
        select.append(option);
      }
      select.value = edit.scoreOverride === null ? "" : String(edit.scoreOverride);
      select.addEventListener("change", () => {
        edit.scoreOverride = select.value === "" ? null : Number(select.value);
        this.refreshFinal();
      });
      scoreCell.append(select);
      row.append(scoreCell);

      row.append(this.el("td", result.confidence.toFixed(3)));

      const feedbackCell = this.doc.createElement("td");
      const area = this.doc.createElement("textarea") as HTMLTextAreaElement;
      area.className = "feedback-input";
      area.disabled = !editable;
      area.value = edit.feedbackOverride ?? result.feedback_text;
      area.addEventListener("input", () => {
        edit.feedbackOverride = area.value === result.feedback_text ? null : area.value;
      });
      feedbackCell.append(area);
      row.append(feedbackCell);

      table.append(row);
    }
    section.append(table);

    const machineFinal = Frac.parse(job.master.final_score);
    const machineLine = this.el(
      "p",
      `machine final score: ${machineFinal.toFixedHalfUp(2)}`,
    );
    machineLine.id = "machine-final";
    machineLine.dataset.exact = machineFinal.toString();
    section.append(machineLine);

    const finalLine = this.el("p", "");
    finalLine.id = "final-display";
    section.append(finalLine);
    this.refreshFinal();

    const save = this.el("button", "save review") as HTMLButtonElement;
    save.id = "save-button";
    save.disabled = !editable;
    save.addEventListener("click", () => void this.save());
    section.append(save);

    const approve = this.el("button", "approve") as HTMLButtonElement;
    approve.id = "approve-button";
    approve.disabled = !editable;
    approve.addEventListener("click", () => void this.approveJob());
    section.append(approve);

    if (job.state === "APPROVED" || job.state === "REPORTED") {
      this.renderReportControls(section);
    }
  }

  /** Recompute the displayed final score from the shown scores. Display
   * only: the server recomputes the real value at approval. */
  private refreshFinal(): void {
    const job = this.job;
    if (job === null || job.master === null) {
      return;
    }
    const final = displayedFinal(job.master, this.buffer, this.weights);
    const line = this.doc.getElementById("final-display");
    if (line !== null) {
      line.textContent = `final score: ${final.toFixedHalfUp(2)}`;
      line.dataset.exact = final.toString();
    }
  }

  private renderReportControls(section: HTMLElement): void {
    const job = this.job!;
    const link = this.doc.createElement("a");
    link.id = "report-link";
    link.href = this.client.reportUrl(job.job_id, "printable");
    link.textContent = "printable report";
    section.append(link);

    const fetchButton = this.el("button", "retrieve report") as HTMLButtonElement;
    fetchButton.id = "fetch-report-button";
    fetchButton.addEventListener("click", () => void this.retrieveReport());
    section.append(fetchButton);

    const status = this.el("p", "");
    status.id = "report-status";
    section.append(status);
  }

  // --- actions ---------------------------------------------------------------

  async save(): Promise<void> {
    const job = this.job;
    if (job === null) {
      return;
    }
    try {
      this.job = await this.client.putReview(job.job_id, editsPayload(this.buffer));
    } catch (exc) {
      this.actionFailure(exc, job.job_id);
      return;
    }
    this.renderEditor();
    this.banner("info", "review saved");
  }

  async approveJob(): Promise<void> {
    const job = this.job;
    if (job === null || job.master === null) {
      return;
    }
    const displayed = displayedFinal(job.master, this.buffer, this.weights);
    let approved;
    try {
      approved = await this.client.approve(job.job_id);
    } catch (exc) {
      this.actionFailure(exc, job.job_id);
      return;
    }
    this.job = approved;
    this.renderEditor();
    const serverFinal = approved.final_score;
    if (serverFinal !== undefined) {
      const { agrees, server } = reconcile(displayed, serverFinal);
      if (agrees) {
        this.banner("info", `approved; final score ${server.toFixedHalfUp(2)}`);
      } else {
        this.banner(
          "warn",
          `approved, but the displayed final ${displayed.toString()} differs from the ` +
            `server's authoritative ${server.toString()}; check the configured display weights`,
        );
      }
      const line = this.doc.getElementById("final-display");
      if (line !== null) {
        line.textContent = `final score: ${server.toFixedHalfUp(2)} (server)`;
        line.dataset.exact = server.toString();
      }
    }
  }

  async retrieveReport(): Promise<void> {
    const job = this.job;
    if (job === null) {
      return;
    }
    let text;
    try {
      text = await this.client.fetchReport(job.job_id, "printable");
    } catch (exc) {
      this.actionFailure(exc, job.job_id);
      return;
    }
    this.lastReport = text;
    const status = this.doc.getElementById("report-status");
    if (status !== null) {
      status.textContent = `report retrieved (${text.length} characters)`;
    }
    // first retrieval moves the job to REPORTED on the server
    try {
      this.job = await this.client.getJob(job.job_id);
      const state = this.doc.getElementById("editor-state");
      if (state !== null) {
        state.textContent = `state: ${this.job.state}`;
        state.dataset.state = this.job.state;
      }
    } catch {
      // leave the stale state on screen; the next reload corrects it
    }
  }

  private actionFailure(exc: unknown, jobId: string): void {
    if (exc instanceof ApiError && exc.status === 409) {
      this.banner("error", "the job changed state on the server", {
        label: "reload",
        action: () => this.openJob(jobId),
      });
      return;
    }
    this.banner("error", this.describe(exc), {
      label: "retry",
      action: () => this.openJob(jobId),
    });
  }

  // --- rendering helpers -------------------------------------------------------

  private renderShell(view: "queue" | "editor"): void {
    this.root.textContent = "";
    const banner = this.doc.createElement("div");
    banner.id = "banner";
    banner.hidden = true;
    this.root.append(banner);
    const section = this.doc.createElement("div");
    section.id = "view";
    section.dataset.view = view;
    this.root.append(section);
  }

  private section(): HTMLElement {
    return this.doc.getElementById("view") as HTMLElement;
  }

  private banner(
    kind: "info" | "warn" | "error",
    text: string,
    action?: { label: string; action: () => void | Promise<void> },
  ): void {
    const banner = this.doc.getElementById("banner");
    if (banner === null) {
      return;
    }
    banner.hidden = false;
    banner.className = `banner ${kind}`;
    banner.textContent = text;
    if (action !== undefined) {
      const button = this.el("button", action.label) as HTMLButtonElement;
      button.className = "banner-action";
      button.addEventListener("click", () => void action.action());
      banner.append(button);
    }
  }

  private describe(exc: unknown): string {
    if (exc instanceof ConnectionError) {
      return `cannot reach the grading service: ${exc.message}`;
    }
    if (exc instanceof ApiError) {
      return `${exc.code}: ${exc.message}`;
    }
    return exc instanceof Error ? exc.message : String(exc);
  }

  private el(tag: string, text: string): HTMLElement {
    const node = this.doc.createElement(tag);
    node.textContent = text;
    return node;
  }
}
