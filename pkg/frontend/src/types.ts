/** Wire types for the review service API (machine report format v1). */

export type Label = "compliant_unknown" | "problematic" | "unlawful";

/** Half-open [start, end) character offsets counted in Unicode code points. */
export type Span = [number, number];

export interface DecisionMeta {
  decision_id: string;
  authority: string;
  authority_level: string;
  jurisdiction: string;
  date: string;
}

export interface Ground {
  kind: "gdpr_article" | "decision";
  article?: string;
  decision_id?: string;
  /** Present on expanded findings responses; null when the store has no record. */
  decision?: DecisionMeta | null;
}

export interface RuleMatch {
  rule_id: string;
  span: Span;
  similarity: number;
}

export interface Finding {
  finding_id: string;
  segment_id: string;
  granularity: "sentence" | "paragraph";
  segment_index: number;
  span: Span;
  text: string;
  label: Label;
  grounds: Ground[];
  matched_rules: RuleMatch[];
  confidence: number;
  context_used: boolean;
}

export interface ChecklistEntry {
  item_id: string;
  title: string;
  article: string;
  status: "present" | "missing";
  evidence: string[];
}

export interface ReadabilityScore {
  unit: "segment" | "document";
  index: number | null;
  fre: number;
  fkgl: number;
  adjusted_fre: number;
}

export interface SegmentInfo {
  span: Span;
  parent_index: number | null;
  is_heading: boolean;
  is_list_intro: boolean;
  is_list_item: boolean;
}

export interface ReportDocument {
  language: string;
  source_kind: string;
  raw_text: string;
  paragraphs: SegmentInfo[];
  sentences: SegmentInfo[];
}

export interface Report {
  format: string;
  version: number;
  doc_id: string;
  as_of: string;
  jurisdiction: string;
  counts: { problematic: number; unlawful: number; missing: number };
  composite: number;
  percentile: number | null;
  findings: Finding[];
  checklist: ChecklistEntry[];
  readability: ReadabilityScore[];
  document: ReportDocument;
}

export interface FindingsResponse {
  doc_id: string;
  findings: Finding[];
}

export interface FeedbackResponse {
  finding_id: string;
  verdict: "confirm" | "reject";
  new_rule_weights: Record<string, number>;
}

export interface RankResponse {
  doc_id: string;
  cohort: string;
  cohort_size: number;
  percentile: number;
}
