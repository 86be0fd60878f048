/** Split document text into plain/highlighted pieces from finding spans.
 *
 * The API counts offsets in Unicode code points while JavaScript strings
 * index UTF-16 code units, so spans are mapped through a code-point index
 * before slicing. Pieces concatenate back to the exact input text.
 */

import type { Finding, Span } from "./types";

export interface TextPiece {
  text: string;
  finding: Finding | null;
}

/** utf16[i] = UTF-16 index of code point i; one extra entry for the end. */
export function codePointIndex(text: string): number[] {
  const index: number[] = [];
  let utf16 = 0;
  for (const ch of text) {
    index.push(utf16);
    utf16 += ch.length;
  }
  index.push(text.length);
  return index;
}

export function sliceBySpan(text: string, span: Span, index?: number[]): string {
  const cp = index ?? codePointIndex(text);
  return text.slice(cp[span[0]], cp[span[1]]);
}

/**
 * Order findings by span and cut the text around them. Throws on
 * overlapping spans: segment-level findings never overlap, so an overlap
 * means the report and the text are out of sync.
 */
export function segmentText(text: string, findings: Finding[]): TextPiece[] {
  const cp = codePointIndex(text);
  const ordered = [...findings].sort((a, b) => a.span[0] - b.span[0]);
  const pieces: TextPiece[] = [];
  let cursor = 0;
  for (const finding of ordered) {
    const [start, end] = finding.span;
    if (start < cursor) {
      throw new Error(`overlapping finding span at ${start} (cursor ${cursor})`);
    }
    if (end > cp.length - 1) {
      throw new Error(`finding span [${start}, ${end}) exceeds text length`);
    }
    if (start > cursor) {
      pieces.push({ text: text.slice(cp[cursor], cp[start]), finding: null });
    }
    pieces.push({ text: text.slice(cp[start], cp[end]), finding });
    cursor = end;
  }
  const total = cp.length - 1;
  if (cursor < total) {
    pieces.push({ text: text.slice(cp[cursor], cp[total]), finding: null });
  }
  return pieces.filter((p) => p.text.length > 0 || p.finding !== null);
}

/** Recover each highlighted piece's code-point span, for fidelity checks. */
export function pieceSpans(pieces: TextPiece[]): Map<string, Span> {
  const spans = new Map<string, Span>();
  let offset = 0;
  for (const piece of pieces) {
    const length = [...piece.text].length;
    if (piece.finding) {
      spans.set(piece.finding.finding_id, [offset, offset + length]);
    }
    offset += length;
  }
  return spans;
}
