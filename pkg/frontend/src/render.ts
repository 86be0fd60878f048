/** DOM rendering: highlighted document, legal-basis panel, dashboard. */

import { formatPercentile, formatWeight, missingItems, paragraphBars } from "./dashboard";
import { segmentText } from "./highlight";
import type { FeedbackStatus, ViewState } from "./state";
import type { Finding, Ground, RankResponse, Report } from "./types";

export interface FeedbackHandler {
  (finding: Finding, verdict: "confirm" | "reject"): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function groundLabel(ground: Ground): string {
  if (ground.kind === "gdpr_article") return `GDPR art. ${ground.article}`;
  if (ground.decision) {
    const d = ground.decision;
    return `${d.authority} (${d.authority_level}, ${d.jurisdiction}) ${d.date} — ${d.decision_id}`;
  }
  return `decision ${ground.decision_id}`;
}

export function renderDocumentView(
  container: HTMLElement,
  state: ViewState,
  onSelect: (finding: Finding) => void,
): void {
  container.replaceChildren();
  const report = state.report;
  const visible = state.visibleFindings();
  if (visible.length === 0) {
    container.appendChild(el("p", "no-flags", "No flags for this document."));
  }
  const text = report.document.raw_text;
  const byParagraph = new Map<number, Finding[]>();
  for (const finding of visible) {
    const pidx =
      finding.granularity === "paragraph"
        ? finding.segment_index
        : (report.document.sentences[finding.segment_index]?.parent_index ?? 0);
    const bucket = byParagraph.get(pidx) ?? [];
    bucket.push(finding);
    byParagraph.set(pidx, bucket);
  }
  report.document.paragraphs.forEach((para, pidx) => {
    const tag = para.is_heading ? "h3" : "p";
    const node = el(tag as "p");
    const paraText = text.slice(...utf16Span(text, para.span));
    const local = (byParagraph.get(pidx) ?? []).map((f) => ({
      ...f,
      span: [f.span[0] - para.span[0], f.span[1] - para.span[0]] as [number, number],
    }));
    for (const piece of segmentText(paraText, local)) {
      if (piece.finding === null) {
        node.appendChild(document.createTextNode(piece.text));
      } else {
        const mark = el("mark", piece.finding.label, piece.text);
        mark.dataset.findingId = piece.finding.finding_id;
        mark.addEventListener("click", () => {
          const original = visible.find(
            (f) => f.finding_id === piece.finding!.finding_id,
          )!;
          onSelect(original);
        });
        node.appendChild(mark);
      }
    }
    container.appendChild(node);
  });
}

function utf16Span(text: string, span: [number, number]): [number, number] {
  let utf16 = 0;
  let cp = 0;
  let start = -1;
  for (const ch of text) {
    if (cp === span[0]) start = utf16;
    if (cp === span[1]) return [start, utf16];
    utf16 += ch.length;
    cp += 1;
  }
  if (start === -1) start = text.length;
  return [start, text.length];
}

export function renderFindingPanel(
  container: HTMLElement,
  state: ViewState,
  onFeedback: FeedbackHandler,
): void {
  container.replaceChildren();
  const finding = state.selected;
  if (finding === null) {
    container.appendChild(el("p", "hint", "Select a highlighted clause."));
    return;
  }
  container.appendChild(el("h3", undefined, `Finding ${finding.finding_id}`));
  container.appendChild(el("p", `label ${finding.label}`, finding.label));
  container.appendChild(el("blockquote", undefined, finding.text.trim()));

  const grounds = el("ul", "grounds");
  for (const ground of finding.grounds) {
    grounds.appendChild(el("li", ground.kind, groundLabel(ground)));
  }
  container.appendChild(el("h4", undefined, "Legal basis"));
  container.appendChild(grounds);
  container.appendChild(
    el("p", "confidence", `Confidence ${finding.confidence.toFixed(2)}`),
  );
  if (finding.matched_rules.length > 0) {
    container.appendChild(
      el(
        "p",
        "rules",
        `Rules: ${finding.matched_rules.map((m) => m.rule_id).join(", ")}`,
      ),
    );
  }

  const controls = el("div", "feedback-controls");
  const confirm = el("button", "confirm", "Confirm");
  const reject = el("button", "reject", "Reject");
  confirm.addEventListener("click", () => onFeedback(finding, "confirm"));
  reject.addEventListener("click", () => onFeedback(finding, "reject"));
  controls.appendChild(confirm);
  controls.appendChild(reject);
  container.appendChild(controls);
  container.appendChild(feedbackBadge(state.feedbackFor(finding.finding_id)));
}

export function feedbackBadge(status: FeedbackStatus): HTMLElement {
  switch (status.kind) {
    case "idle":
      return el("span", "badge idle", "not reviewed");
    case "pending":
      return el("span", "badge pending", "sending…");
    case "accepted": {
      const weights = Object.entries(status.weights);
      const text =
        weights.length === 0
          ? "recorded (no rule weights)"
          : weights.map(([rule, w]) => `${rule}: ${formatWeight(w)}`).join(", ");
      return el("span", "badge accepted", text);
    }
    case "duplicate":
      return el("span", "badge duplicate", "already reviewed");
    case "error":
      return el("span", "badge error", status.message);
  }
}

export function renderDashboard(
  container: HTMLElement,
  report: Report,
  rankResponse: RankResponse | null,
): void {
  container.replaceChildren();

  const summary = el("section", "summary");
  summary.appendChild(el("h3", undefined, "Compliance"));
  summary.appendChild(
    el(
      "p",
      undefined,
      `Composite ${report.composite.toFixed(1)} / 100 · ` +
        `${report.counts.unlawful} unlawful · ${report.counts.problematic} problematic · ` +
        `${report.counts.missing} missing`,
    ),
  );
  container.appendChild(summary);

  const checklist = el("section", "checklist");
  checklist.appendChild(el("h3", undefined, "Missing information"));
  const missing = missingItems(report);
  if (missing.length === 0) {
    checklist.appendChild(el("p", "all-present", "All mandatory items found."));
  } else {
    const list = el("ul");
    for (const item of missing) {
      list.appendChild(el("li", "missing-item", `${item.title} (art. ${item.article})`));
    }
    checklist.appendChild(list);
  }
  container.appendChild(checklist);

  const readability = el("section", "readability");
  readability.appendChild(el("h3", undefined, "Readability"));
  for (const bar of paragraphBars(report)) {
    const row = el("div", "bar-row");
    row.appendChild(el("span", "bar-label", `¶${bar.index}`));
    const barEl = el("div", `bar band-${bar.band}`);
    barEl.style.width = `${bar.widthPct}%`;
    barEl.title = `adjusted FRE ${bar.adjusted_fre.toFixed(1)}`;
    row.appendChild(barEl);
    readability.appendChild(row);
  }
  container.appendChild(readability);

  const gauge = el("section", "rank");
  gauge.appendChild(el("h3", undefined, "Comparative rank"));
  if (rankResponse === null) {
    gauge.appendChild(el("p", "hint", "No cohort available."));
  } else {
    const meter = el("div", "gauge");
    const fill = el("div", "gauge-fill");
    fill.style.width = `${rankResponse.percentile}%`;
    meter.appendChild(fill);
    gauge.appendChild(meter);
    gauge.appendChild(
      el(
        "p",
        "gauge-value",
        `percentile ${formatPercentile(rankResponse.percentile)} ` +
          `of ${rankResponse.cohort_size} policies`,
      ),
    );
  }
  container.appendChild(gauge);
}

export function renderErrorBanner(container: HTMLElement, message: string): void {
  const banner = el("div", "error-banner", message);
  container.prepend(banner);
}
