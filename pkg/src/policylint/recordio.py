"""Line-delimited record files with a format-version header.

Every persistent artifact (rule files, checklists, decision files, clause
corpora, trained models, logs) is UTF-8 JSON Lines whose first line is a
header object {"format": "policylint/<kind>", "version": 1}. Keeping one
reader/writer here means every format validates the same way.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterable

from .errors import PolicyLintError

FORMAT_VERSION = 1


class BadRecordFile(PolicyLintError):
    def __init__(self, path: str | Path, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = str(path)
        self.reason = reason


def dump_record(record: dict[str, Any]) -> str:
    """Canonical one-line encoding (stable key order as given)."""
    return json.dumps(record, ensure_ascii=False, separators=(", ", ": "))


def read_records(path: str | Path, kind: str) -> list[dict[str, Any]]:
    """Read all records after validating the header for ``kind``."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise BadRecordFile(path, str(exc)) from exc
    body = [ln for ln in lines if ln.strip()]
    if not body:
        raise BadRecordFile(path, "empty file")
    try:
        header = json.loads(body[0])
    except json.JSONDecodeError as exc:
        raise BadRecordFile(path, f"bad header: {exc}") from exc
    expected = f"policylint/{kind}"
    if not isinstance(header, dict) or header.get("format") != expected:
        raise BadRecordFile(path, f"expected format {expected!r}, got {header!r}")
    if header.get("version") != FORMAT_VERSION:
        raise BadRecordFile(path, f"unsupported version {header.get('version')!r}")
    records = []
    for i, line in enumerate(body[1:], start=2):
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise BadRecordFile(path, f"line {i}: {exc}") from exc
        if not isinstance(rec, dict):
            raise BadRecordFile(path, f"line {i}: record is not an object")
        records.append(rec)
    return records


def write_records(path: str | Path, kind: str, records: Iterable[dict[str, Any]]) -> None:
    path = Path(path)
    lines = [dump_record({"format": f"policylint/{kind}", "version": FORMAT_VERSION})]
    lines.extend(dump_record(r) for r in records)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def append_record(path: str | Path, kind: str, record: dict[str, Any]) -> None:
    """Append one record, writing the header first if the file is new."""
    path = Path(path)
    if not path.exists() or path.stat().st_size == 0:
        header = dump_record({"format": f"policylint/{kind}", "version": FORMAT_VERSION})
        path.write_text(header + "\n", encoding="utf-8")
    with path.open("a", encoding="utf-8") as fh:
        fh.write(dump_record(record) + "\n")
