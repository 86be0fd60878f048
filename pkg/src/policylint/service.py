"""HTTP review service: upload documents, inspect findings, submit feedback.

A thin adapter over the pipeline and knowledge store: every response body
can be reproduced with CLI commands against the same store. Analysis
configuration is fixed per deployment so all reviewers see the same
findings. Auth is a static bearer-token table mapping tokens to reviewer
ids; write endpoints honor an Idempotency-Key header by replaying the
first successful response.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware

from .document import EmptyDocument, UnsupportedLanguage
from .errors import PolicyLintError
from .html_extract import NoExtractableText
from .pipeline import AnalysisConfig, Pipeline
from .reporting import parse_report, rank
from .store import (
    DuplicateVerdict,
    FeedbackRecord,
    KnowledgeStore,
    UnknownFinding,
    utc_timestamp,
)

DEFAULT_MAX_BODY = 1_000_000


@dataclass
class ServiceConfig:
    rules_path: str | None = None
    checklist_path: str | None = None
    lexicon_path: str | None = None
    model_path: str | None = None
    language: str = "en"
    jurisdiction: str = "EU"
    as_of: date | None = None
    max_body_bytes: int = DEFAULT_MAX_BODY
    ui_origin: str = "*"
    tokens: dict[str, str] = field(default_factory=dict)  # token -> reviewer id


def load_tokens(store_dir: str | Path) -> dict[str, str]:
    path = Path(store_dir) / "tokens.json"
    if not path.exists():
        return {}
    data = json.loads(path.read_text(encoding="utf-8"))
    return dict(data.get("tokens", {}))


def _json_response(payload: dict, status: int = 200) -> Response:
    return Response(
        content=json.dumps(payload, ensure_ascii=False),
        status_code=status,
        media_type="application/json",
    )


def _error(status: int, message: str) -> Response:
    return _json_response({"error": message}, status)


def create_app(store_dir: str | Path, config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    if not config.tokens:
        config.tokens = load_tokens(store_dir)
    store = KnowledgeStore(store_dir)
    pipeline = Pipeline.build(
        AnalysisConfig(
            language=config.language,
            jurisdiction=config.jurisdiction,
            as_of=config.as_of,
        ),
        rules_path=config.rules_path,
        checklist_path=config.checklist_path,
        lexicon_path=config.lexicon_path,
        model_path=config.model_path,
        store=store,
    )
    app = FastAPI(title="policylint review service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[config.ui_origin],
        allow_methods=["GET", "POST"],
        allow_headers=["Authorization", "Content-Type", "Idempotency-Key"],
    )
    app.state.store = store
    app.state.pipeline = pipeline
    app.state.config = config
    idempotency_cache: dict[tuple[str, str], tuple[int, bytes]] = {}
    write_lock = threading.Lock()

    def reviewer_for(request: Request) -> str | None:
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            return None
        return config.tokens.get(header[7:].strip())

    def cached(request: Request) -> tuple[str, str] | None:
        key = request.headers.get("idempotency-key")
        if not key:
            return None
        return (request.url.path, key)

    def replay_or(request: Request, compute) -> Response:
        cache_key = cached(request)
        if cache_key is not None and cache_key in idempotency_cache:
            status, body = idempotency_cache[cache_key]
            return Response(body, status_code=status, media_type="application/json")
        response = compute()
        if cache_key is not None and 200 <= response.status_code < 300:
            idempotency_cache[cache_key] = (response.status_code, response.body)
        return response

    @app.post("/documents")
    async def post_document(request: Request) -> Response:
        if reviewer_for(request) is None:
            return _error(401, "missing or unknown bearer token")
        body = await request.body()
        if len(body) > config.max_body_bytes:
            return _error(413, f"body exceeds {config.max_body_bytes} bytes")

        def compute() -> Response:
            try:
                payload = json.loads(body)
            except json.JSONDecodeError:
                return _error(400, "body is not valid JSON")
            if not isinstance(payload, dict):
                return _error(400, "body must be a JSON object")
            text = payload.get("text")
            html = payload.get("html")
            if bool(text) == bool(html):
                return _error(400, "provide exactly one of 'text' or 'html'")
            try:
                with write_lock:
                    doc, report = pipeline.analyze(text or html, is_html=bool(html))
            except (EmptyDocument, NoExtractableText, UnsupportedLanguage) as exc:
                return _error(400, str(exc))
            raw = store.load_report_bytes(doc.doc_id)
            return _json_response({"doc_id": doc.doc_id, "report": json.loads(raw)})

        return replay_or(request, compute)

    @app.get("/documents/{doc_id}/findings")
    def get_findings(doc_id: str, request: Request) -> Response:
        if reviewer_for(request) is None:
            return _error(401, "missing or unknown bearer token")
        report = store.load_report_json(doc_id)
        if report is None:
            return _error(404, f"no document {doc_id!r}")
        findings = [
            {**f, "grounds": [_expand_ground(store, g) for g in f["grounds"]]}
            for f in report["findings"]
        ]
        return _json_response({"doc_id": doc_id, "findings": findings})

    @app.post("/findings/{finding_id}/feedback")
    async def post_feedback(finding_id: str, request: Request) -> Response:
        reviewer = reviewer_for(request)
        if reviewer is None:
            return _error(401, "missing or unknown bearer token")
        body = await request.body()

        def compute() -> Response:
            try:
                payload = json.loads(body)
            except json.JSONDecodeError:
                return _error(400, "body is not valid JSON")
            verdict = payload.get("verdict")
            if verdict not in ("confirm", "reject"):
                return _error(400, "verdict must be 'confirm' or 'reject'")
            doc_id = finding_id.split(":", 1)[0]
            fb = FeedbackRecord(
                feedback_id=store.new_feedback_id(),
                doc_id=doc_id,
                finding_id=finding_id,
                reviewer=reviewer,
                verdict=verdict,
                note=payload.get("note", ""),
                timestamp=utc_timestamp(),
            )
            try:
                with write_lock:
                    weights = store.record_feedback(fb)
            except UnknownFinding as exc:
                return _error(404, str(exc))
            except DuplicateVerdict as exc:
                return _error(409, str(exc))
            return _json_response(
                {"finding_id": finding_id, "verdict": verdict, "new_rule_weights": weights}
            )

        return replay_or(request, compute)

    @app.get("/reports/{doc_id}")
    def get_report(doc_id: str, request: Request) -> Response:
        if reviewer_for(request) is None:
            return _error(401, "missing or unknown bearer token")
        raw = store.load_report_bytes(doc_id)
        if raw is None:
            return _error(404, f"no report {doc_id!r}")
        # Serve the stored bytes verbatim: identical to the CLI machine render.
        return Response(raw, media_type="application/json")

    @app.get("/reports/{doc_id}/rank")
    def get_rank(doc_id: str, request: Request, cohort: str = "all") -> Response:
        if reviewer_for(request) is None:
            return _error(401, "missing or unknown bearer token")
        raw = store.load_report_bytes(doc_id)
        if raw is None:
            return _error(404, f"no report {doc_id!r}")
        target = parse_report(raw)
        members = []
        for other_id in store.list_report_ids():
            if other_id == doc_id:
                continue
            other = parse_report(store.load_report_bytes(other_id))
            if cohort != "all":
                kind, _, value = cohort.partition(":")
                if kind != "jurisdiction" or other.jurisdiction != value:
                    continue
            members.append(other)
        if not members:
            return _error(422, f"cohort {cohort!r} is empty")
        return _json_response(
            {
                "doc_id": doc_id,
                "cohort": cohort,
                "cohort_size": len(members),
                "percentile": rank(target, members),
            }
        )

    @app.exception_handler(PolicyLintError)
    async def domain_error(request: Request, exc: PolicyLintError) -> Response:
        return _error(400, str(exc))

    return app


def _expand_ground(store: KnowledgeStore, ground: dict) -> dict:
    """Join decision grounds with their stored authority metadata."""
    if ground.get("kind") != "decision":
        return ground
    decision = store.decisions.get(ground.get("decision_id", ""))
    if decision is None:
        return {**ground, "decision": None}
    return {
        **ground,
        "decision": {
            "decision_id": decision.decision_id,
            "authority": decision.authority,
            "authority_level": decision.level_name,
            "jurisdiction": decision.jurisdiction,
            "date": decision.date.isoformat(),
        },
    }
