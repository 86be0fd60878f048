import { describe, expect, it } from "vitest";

import reportFixture from "./fixtures/report.json";
import findingsFixture from "./fixtures/findings.json";
import { ViewState } from "../src/state";
import type { FindingsResponse, Report } from "../src/types";

function load(): ViewState {
  const report = JSON.parse(JSON.stringify(reportFixture)) as Report;
  const findings = JSON.parse(JSON.stringify(findingsFixture)) as FindingsResponse;
  return new ViewState(report, findings.findings);
}

describe("view state invariants", () => {
  it("selected finding must exist in the loaded report", () => {
    const state = load();
    expect(() => state.select("doc-x:sentence:99")).toThrow(/not in the loaded report/);
    state.select(state.findings[0].finding_id);
    expect(state.selected?.finding_id).toBe(state.findings[0].finding_id);
  });

  it("report data is frozen against mutation", () => {
    const state = load();
    expect(() => {
      (state.report as { composite: number }).composite = 99;
    }).toThrow();
    expect(() => {
      state.report.findings.pop();
    }).toThrow();
  });

  it("label filter hides findings and drops a hidden selection", () => {
    const state = load();
    const unlawful = state.findings.find((f) => f.label === "unlawful")!;
    state.select(unlawful.finding_id);
    state.setLabelFilter(["problematic"]);
    expect(state.visibleFindings().every((f) => f.label === "problematic")).toBe(true);
    expect(state.selected).toBeNull();
  });

  it("ground filter matches article ids and decision ids", () => {
    const state = load();
    state.setGroundFilter("CNIL-2019-0042");
    expect(state.visibleFindings()).toHaveLength(1);
    state.setGroundFilter("5(1)(e)");
    expect(state.visibleFindings().length).toBeGreaterThanOrEqual(1);
    state.setGroundFilter(null);
    expect(state.visibleFindings()).toHaveLength(5);
  });

  it("feedback status is idle until set", () => {
    const state = load();
    const id = state.findings[0].finding_id;
    expect(state.feedbackFor(id)).toEqual({ kind: "idle" });
    state.setFeedback(id, { kind: "duplicate" });
    expect(state.feedbackFor(id)).toEqual({ kind: "duplicate" });
  });
});
