/** Entry point: wire the API, state, and renderers together.
 *
 * Configuration comes from query parameters:
 *   ?doc=<doc_id>&token=<bearer token>&api=<base url, default same origin>
 */

import { ApiError, fetchFindings, fetchRank, fetchReport, newIdempotencyKey, submitFeedback } from "./api";
import { renderDashboard, renderDocumentView, renderErrorBanner, renderFindingPanel } from "./render";
import { ViewState } from "./state";
import type { Finding } from "./types";

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const docId = params.get("doc");
  const token = params.get("token") ?? "";
  const baseUrl = params.get("api") ?? "";
  const docView = document.getElementById("document-view")!;
  const panel = document.getElementById("finding-panel")!;
  const dashboard = document.getElementById("dashboard")!;

  if (!docId) {
    renderErrorBanner(document.body, "Missing ?doc=<doc_id> parameter.");
    return;
  }
  const config = { baseUrl, token };

  let state: ViewState;
  try {
    const [report, findings] = await Promise.all([
      fetchReport(config, docId),
      fetchFindings(config, docId),
    ]);
    state = new ViewState(report, findings.findings);
  } catch (err) {
    const message =
      err instanceof ApiError
        ? `Failed to load document (${err.status}): ${err.message}`
        : `Failed to load document: ${String(err)}`;
    renderErrorBanner(document.body, message);
    return;
  }

  const rank = await fetchRank(config, docId).catch(() => null);

  const redraw = () => {
    renderDocumentView(docView, state, (finding) => {
      state.select(finding.finding_id);
      redraw();
    });
    renderFindingPanel(panel, state, onFeedback);
    renderDashboard(dashboard, state.report, rank);
  };

  const onFeedback = (finding: Finding, verdict: "confirm" | "reject") => {
    const key = newIdempotencyKey();
    state.setFeedback(finding.finding_id, { kind: "pending" });
    redraw();
    submitFeedback(config, finding.finding_id, verdict, key)
      .then((response) => {
        state.setFeedback(finding.finding_id, {
          kind: "accepted",
          weights: response.new_rule_weights,
        });
      })
      .catch((err) => {
        if (err instanceof ApiError && err.status === 409) {
          state.setFeedback(finding.finding_id, { kind: "duplicate" });
        } else {
          state.setFeedback(finding.finding_id, {
            kind: "error",
            message: err instanceof Error ? err.message : String(err),
          });
        }
      })
      .finally(redraw);
  };

  redraw();
}

void boot();
