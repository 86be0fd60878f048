/** Client-side view state. Report data is frozen on load and never
 * mutated; every write goes to the server and the view re-fetches truth. */

import type { Finding, Label, Report } from "./types";

export type FeedbackStatus =
  | { kind: "idle" }
  | { kind: "pending" }
  | { kind: "accepted"; weights: Record<string, number> }
  | { kind: "duplicate" }
  | { kind: "error"; message: string };

function deepFreeze<T>(value: T): T {
  if (value && typeof value === "object" && !Object.isFrozen(value)) {
    Object.freeze(value);
    for (const key of Object.keys(value)) {
      deepFreeze((value as Record<string, unknown>)[key]);
    }
  }
  return value;
}

export class ViewState {
  readonly report: Report;
  readonly findings: readonly Finding[];
  private selectedId: string | null = null;
  private labelFilter: Set<Label> | null = null;
  private groundFilter: string | null = null;
  private feedback = new Map<string, FeedbackStatus>();

  constructor(report: Report, findings: Finding[]) {
    this.report = deepFreeze(report);
    this.findings = deepFreeze([...findings]);
  }

  get selected(): Finding | null {
    if (this.selectedId === null) return null;
    return this.findings.find((f) => f.finding_id === this.selectedId) ?? null;
  }

  select(findingId: string | null): void {
    if (findingId === null) {
      this.selectedId = null;
      return;
    }
    if (!this.findings.some((f) => f.finding_id === findingId)) {
      throw new Error(`finding ${findingId} is not in the loaded report`);
    }
    this.selectedId = findingId;
  }

  setLabelFilter(labels: Label[] | null): void {
    this.labelFilter = labels === null ? null : new Set(labels);
    if (this.selected && !this.isVisible(this.selected)) {
      this.selectedId = null;
    }
  }

  /** Filter by ground: an article ("15") or a decision id. */
  setGroundFilter(ground: string | null): void {
    this.groundFilter = ground;
    if (this.selected && !this.isVisible(this.selected)) {
      this.selectedId = null;
    }
  }

  private isVisible(finding: Finding): boolean {
    if (this.labelFilter && !this.labelFilter.has(finding.label)) return false;
    if (this.groundFilter) {
      const g = this.groundFilter;
      if (!finding.grounds.some((x) => x.article === g || x.decision_id === g)) {
        return false;
      }
    }
    return true;
  }

  visibleFindings(): Finding[] {
    return this.findings.filter((f) => this.isVisible(f));
  }

  feedbackFor(findingId: string): FeedbackStatus {
    return this.feedback.get(findingId) ?? { kind: "idle" };
  }

  setFeedback(findingId: string, status: FeedbackStatus): void {
    this.feedback.set(findingId, status);
  }
}
