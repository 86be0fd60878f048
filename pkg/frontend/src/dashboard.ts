/** Pure helpers behind the dashboard widgets: missing-information list,
 * per-paragraph readability bars, and the comparative percentile gauge. */

import type { ChecklistEntry, Report } from "./types";

export type ReadabilityBand = "hard" | "medium" | "easy";

/** Bands over adjusted FRE: below 30, 30 to under 60, 60 and up. */
export function bandFor(adjustedFre: number): ReadabilityBand {
  if (adjustedFre < 30) return "hard";
  if (adjustedFre < 60) return "medium";
  return "easy";
}

export function missingItems(report: Report): ChecklistEntry[] {
  return report.checklist.filter((entry) => entry.status === "missing");
}

export interface ParagraphBar {
  index: number;
  adjusted_fre: number;
  band: ReadabilityBand;
  /** Bar width as a share of a 0..100 readability axis, clamped. */
  widthPct: number;
}

export function paragraphBars(report: Report): ParagraphBar[] {
  return report.readability
    .filter((s) => s.unit === "segment" && s.index !== null)
    .map((s) => ({
      index: s.index as number,
      adjusted_fre: s.adjusted_fre,
      band: bandFor(s.adjusted_fre),
      widthPct: Math.max(0, Math.min(100, s.adjusted_fre)),
    }));
}

export function formatPercentile(percentile: number): string {
  return percentile.toFixed(2);
}

export function formatWeight(weight: number): string {
  return weight.toFixed(3);
}
