"""Mandatory-information checks against a disclosure checklist.

Each checklist item names a GDPR article and a set of detector patterns; an
item is present when any detector matches anywhere in the document, so
presence never depends on where the disclosure sits.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from . import recordio
from .document import PolicyDocument
from .errors import PolicyLintError
from .textnorm import contains_token_seq, fold_tokens


class InvalidChecklist(PolicyLintError):
    pass


@dataclass(frozen=True)
class ChecklistItem:
    item_id: str
    title: str
    article: str
    detectors: tuple[str, ...]
    jurisdiction_overrides: tuple[tuple[str, tuple[str, ...]], ...] = ()


@dataclass(frozen=True)
class Checklist:
    items: tuple[ChecklistItem, ...]
    jurisdiction: str

    def item(self, item_id: str) -> ChecklistItem:
        for it in self.items:
            if it.item_id == item_id:
                return it
        raise KeyError(item_id)


@dataclass(frozen=True)
class ChecklistStatus:
    item_id: str
    status: str  # "present" | "missing"
    evidence: tuple[str, ...] = ()  # segment ids


def load_checklist(path: str | Path, jurisdiction: str) -> Checklist:
    """Load items and fold in the overrides for ``jurisdiction``."""
    try:
        records = recordio.read_records(path, "checklist")
    except recordio.BadRecordFile as exc:
        raise InvalidChecklist(str(exc)) from exc
    if not records:
        raise InvalidChecklist(f"{path}: checklist has no items")
    items: list[ChecklistItem] = []
    seen: set[str] = set()
    for rec in records:
        item_id = rec.get("item_id")
        if not item_id:
            raise InvalidChecklist(f"{path}: item without item_id")
        if item_id in seen:
            raise InvalidChecklist(f"{path}: duplicate item_id {item_id!r}")
        seen.add(item_id)
        overrides = rec.get("jurisdiction_overrides") or {}
        detectors = list(rec.get("detectors") or ())
        detectors.extend(overrides.get(jurisdiction, ()))
        if not detectors:
            raise InvalidChecklist(f"{path}: item {item_id!r} has no detectors")
        items.append(
            ChecklistItem(
                item_id=item_id,
                title=rec.get("title", item_id),
                article=str(rec.get("article", "")),
                detectors=tuple(detectors),
                jurisdiction_overrides=tuple(
                    (jur, tuple(pats)) for jur, pats in sorted(overrides.items())
                ),
            )
        )
    items.sort(key=lambda it: it.item_id)
    return Checklist(items=tuple(items), jurisdiction=jurisdiction)


def detect_items(doc: PolicyDocument, checklist: Checklist) -> list[ChecklistStatus]:
    """Scan every sentence for every item's detectors; order by item_id."""
    sentence_tokens = [(s.segment_id, fold_tokens(s.text)) for s in doc.sentences]
    detector_seqs = {
        it.item_id: [tuple(fold_tokens(d)) for d in it.detectors] for it in checklist.items
    }
    statuses = []
    for item in checklist.items:
        seqs = [s for s in detector_seqs[item.item_id] if s]
        evidence = tuple(
            seg_id
            for seg_id, tokens in sentence_tokens
            if any(contains_token_seq(tokens, seq) for seq in seqs)
        )
        statuses.append(
            ChecklistStatus(
                item_id=item.item_id,
                status="present" if evidence else "missing",
                evidence=evidence,
            )
        )
    return statuses


def missing_report(
    statuses: list[ChecklistStatus], checklist: Checklist
) -> list[tuple[str, str]]:
    """(item_id, article) for every missing item, for the legal-basis panel."""
    return [
        (st.item_id, checklist.item(st.item_id).article)
        for st in statuses
        if st.status == "missing"
    ]
