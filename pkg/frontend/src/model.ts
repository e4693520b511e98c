/** Client-side review state: the edit buffer and the display-only final
 * score recomputation.
 *
 * The console never computes grading truth. The displayed final score is
 * recomputed locally from the currently shown (possibly overridden) scores
 * purely for immediacy; the value returned by the server on approval is
 * authoritative, and any disagreement is surfaced as a warning. */

import { Frac, ZERO } from "./fraction.js";
import type { JobView, MasterView, ReviewEditView, ReviewEditsPayload } from "./api.js";

export const EDITABLE_STATE = "AWAITING_REVIEW";

export interface DimensionEdit {
  scoreOverride: number | null;
  feedbackOverride: string | null;
}

export type EditBuffer = Map<string, DimensionEdit>;

export type WeightMap = Map<string, Frac>;

export function canEdit(state: string): boolean {
  return state === EDITABLE_STATE;
}

/** Dimensions of a master, in their server (sorted) order. */
export function dimensionIds(master: MasterView): string[] {
  return Object.keys(master.results);
}

/** Weights used for display recomputation. Defaults to uniform; a
 * deployment with a non-uniform registry can inject its weights as
 * fraction strings via console configuration. */
export function buildWeights(dims: string[], configured?: Record<string, string>): WeightMap {
  const weights: WeightMap = new Map();
  for (const dim of dims) {
    const text = configured?.[dim];
    weights.set(dim, text === undefined ? new Frac(1n) : Frac.parse(text));
  }
  return weights;
}

export function emptyBuffer(dims: string[]): EditBuffer {
  const buffer: EditBuffer = new Map();
  for (const dim of dims) {
    buffer.set(dim, { scoreOverride: null, feedbackOverride: null });
  }
  return buffer;
}

/** Seed the buffer from edits already stored on the server, so reopening a
 * half-reviewed job shows what will actually take effect. */
export function bufferFromServer(
  dims: string[],
  stored: Record<string, ReviewEditView>,
): EditBuffer {
  const buffer = emptyBuffer(dims);
  for (const [dim, edit] of Object.entries(stored)) {
    if (buffer.has(dim)) {
      buffer.set(dim, {
        scoreOverride: edit.score_override ?? null,
        feedbackOverride: edit.feedback_override ?? null,
      });
    }
  }
  return buffer;
}

export function effectiveScore(master: MasterView, buffer: EditBuffer, dim: string): number {
  const edit = buffer.get(dim);
  if (edit !== undefined && edit.scoreOverride !== null) {
    return edit.scoreOverride;
  }
  return master.results[dim].score;
}

export function effectiveFeedback(master: MasterView, buffer: EditBuffer, dim: string): string {
  const edit = buffer.get(dim);
  if (edit !== undefined && edit.feedbackOverride !== null) {
    return edit.feedbackOverride;
  }
  return master.results[dim].feedback_text;
}

/** Exact weighted mean of the currently shown scores. */
export function displayedFinal(master: MasterView, buffer: EditBuffer, weights: WeightMap): Frac {
  let numerator = ZERO;
  let denominator = ZERO;
  for (const dim of dimensionIds(master)) {
    const weight = weights.get(dim) ?? new Frac(1n);
    numerator = numerator.add(weight.mul(Frac.fromInt(effectiveScore(master, buffer, dim))));
    denominator = denominator.add(weight);
  }
  if (denominator.isZero()) {
    throw new RangeError("weights sum to zero");
  }
  return numerator.div(denominator);
}

/** The PUT body for the current buffer: only dimensions that actually
 * override something are sent (the server replaces the whole edit set). */
export function editsPayload(buffer: EditBuffer): ReviewEditsPayload {
  const edits: ReviewEditsPayload["edits"] = {};
  for (const [dim, edit] of buffer) {
    if (edit.scoreOverride !== null || edit.feedbackOverride !== null) {
      edits[dim] = {};
      if (edit.scoreOverride !== null) {
        edits[dim].score_override = edit.scoreOverride;
      }
      if (edit.feedbackOverride !== null) {
        edits[dim].feedback_override = edit.feedbackOverride;
      }
    }
  }
  return { edits };
}

/** Compare the locally displayed final score with the server's value
 * (returned by approve). A mismatch means the configured display weights
 * disagree with the registry; it is reported, never silently resolved. */
export function reconcile(displayed: Frac, serverFinal: string): { agrees: boolean; server: Frac } {
  const server = Frac.parse(serverFinal);
  return { agrees: displayed.eq(server), server };
}

export function machineFinal(job: JobView): Frac | null {
  return job.master === null ? null : Frac.parse(job.master.final_score);
}
