"""HTTP API over the pipeline.

Every response is an envelope: {"ok": true, "data": ...} on success or
{"ok": false, "error": {"stage": ..., "message": ...}} on failure, with
400 for malformed requests, 404 for unknown ids, and 422 for pipeline
failures.
"""

from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, File, Form, Request, UploadFile
from fastapi.responses import JSONResponse

from .config import DEFAULT_CONFIG, EngineConfig
from .engine import DocEngine
from .errors import (DocrelateError, MalformedImage, MalformedInput,
                     UnknownDocument, UnknownSession, UnknownTable,
                     UnknownWorkflow, UnsupportedFormat)
from .ingest import OCR_FORMATS
from .nl import Response as NLResponse
from .relstore import Relation

_NOT_FOUND = (UnknownDocument, UnknownSession, UnknownWorkflow, UnknownTable)
_BAD_REQUEST = (MalformedInput, MalformedImage, UnsupportedFormat)


def _ok(data) -> JSONResponse:
    return JSONResponse({"ok": True, "data": data})


def _fail(stage: str, message: str, status: int) -> JSONResponse:
    return JSONResponse({"ok": False, "error": {"stage": stage, "message": message}},
                        status_code=status)


def _status_for(exc: DocrelateError) -> int:
    if isinstance(exc, _NOT_FOUND):
        return 404
    if isinstance(exc, _BAD_REQUEST):
        return 400
    return 422


def relation_payload(relation: Relation) -> dict:
    return {
        "name": relation.name,
        "columns": [{"name": n, "type": t} for n, t in relation.columns],
        "rows": [list(row) for row in relation.rows],
    }


def response_payload(resp: NLResponse) -> dict:
    return {
        "kind": resp.kind,
        "message": resp.message,
        "sql": resp.sql,
        "relation": relation_payload(resp.relation) if resp.relation else None,
        "highlight_word_ids": list(resp.highlight_word_ids),
    }


def entities_payload(record) -> dict:
    ents = record.entities
    return {
        "doc_id": record.doc_id,
        "page_size": list(record.raw.page_size),
        "words": [{"word_id": w.word_id, "text": w.text, "bbox": list(w.bbox),
                   "confidence": w.confidence} for w in ents.words],
        "lines": [{"line_id": l.line_id, "text": l.text, "bbox": list(l.bbox),
                   "block_id": l.block_id, "box_id": l.box_id,
                   "word_ids": list(l.word_ids)} for l in ents.lines],
        "blocks": [{"block_id": b.block_id, "bbox": list(b.bbox),
                    "line_ids": list(b.line_ids)} for b in ents.blocks],
        "boxes": [{"box_id": b.box_id, "bbox": list(b.bbox)} for b in ents.boxes],
    }


def create_app(engine: DocEngine | None = None,
               data_dir: str | None = None,
               config: EngineConfig = DEFAULT_CONFIG,
               ui_dir: str | None = None) -> FastAPI:
    engine = engine or DocEngine(data_dir=data_dir, config=config)
    app = FastAPI(title="docrelate", version="0.1.0")
    app.state.engine = engine

    from fastapi.middleware.cors import CORSMiddleware
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    if ui_dir:
        from fastapi.staticfiles import StaticFiles
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    @app.exception_handler(DocrelateError)
    async def _handle_docrelate(request: Request, exc: DocrelateError):
        return _fail(stage=type(exc).__name__, message=str(exc),
                     status=_status_for(exc))

    @app.post("/documents")
    async def post_document(ocr: UploadFile = File(...),
                            image: Optional[UploadFile] = File(None),
                            format: str = Form("jsonwords"),
                            doc_id: Optional[str] = Form(None)):
        if format not in OCR_FORMATS:
            return _fail("ingest", f"unknown format {format!r}", 400)
        ocr_payload = await ocr.read()
        raster_payload = await image.read() if image is not None else None
        record = engine.ingest(ocr_payload, format, raster_payload,
                               doc_id=doc_id)
        ents = record.entities
        return _ok({
            "doc_id": record.doc_id,
            "counts": {"words": len(ents.words), "lines": len(ents.lines),
                       "blocks": len(ents.blocks), "boxes": len(ents.boxes)},
        })

    @app.get("/documents/{doc_id}/entities")
    async def get_entities(doc_id: str):
        return _ok(entities_payload(engine.get_document(doc_id)))

    @app.get("/documents/{doc_id}/tables/{name}")
    async def get_table(doc_id: str, name: str):
        record = engine.get_document(doc_id)
        return _ok(relation_payload(record.db.get_table(name)))

    @app.post("/sessions")
    async def post_session(body: dict):
        doc_id = body.get("doc_id")
        if not doc_id:
            return _fail("session", "body must carry doc_id", 400)
        session = engine.create_session(doc_id)
        return _ok({"session_id": session.session_id, "doc_id": session.doc_id,
                    "template_id": session.template_id})

    @app.post("/sessions/{session_id}/utterance")
    async def post_utterance(session_id: str, body: dict):
        text = body.get("text")
        if not text:
            return _fail("utterance", "body must carry text", 400)
        resp = engine.utterance(session_id, text)
        if resp.kind == "error":
            return _fail(resp.stage or "pipeline", resp.message, 422)
        return _ok(response_payload(resp))

    @app.post("/sessions/{session_id}/sql")
    async def post_sql(session_id: str, body: dict):
        text = body.get("text")
        if not text:
            return _fail("sql", "body must carry text", 400)
        resp = engine.sql(session_id, text)
        return _ok(response_payload(resp))

    @app.post("/workflows")
    async def post_workflow(body: dict):
        session_id = body.get("session_id")
        name = body.get("name")
        if not session_id or not name:
            return _fail("workflow", "body must carry session_id and name", 400)
        from .workflow import save_workflow
        session = engine.get_session(session_id)
        wf = save_workflow(session, name, engine.workflows)
        return _ok({"name": wf.name, "steps": len(wf.steps),
                    "template_id": wf.template_id})

    @app.get("/workflows")
    async def get_workflows():
        out = []
        for name in engine.workflows.names():
            wf = engine.workflows.get(name)
            out.append({"name": wf.name, "steps": len(wf.steps),
                        "template_id": wf.template_id})
        return _ok({"workflows": out})

    @app.post("/workflows/{name}/apply")
    async def post_apply(name: str, body: dict):
        doc_id = body.get("doc_id")
        if not doc_id:
            return _fail("workflow", "body must carry doc_id", 400)
        outcome = engine.apply_workflow(name, doc_id)
        return _ok({
            "workflow": outcome.workflow,
            "template_warning": outcome.template_warning,
            "steps": [{
                "sql": step.sql_text,
                "empty": step.empty,
                "error": step.error,
                "relation": relation_payload(step.relation) if step.relation else None,
            } for step in outcome.steps],
        })

    @app.post("/templates")
    async def post_template(body: dict):
        doc_id = body.get("doc_id")
        name = body.get("name")
        if not doc_id or not name:
            return _fail("template", "body must carry doc_id and name", 400)
        signature_id = engine.register_template(doc_id, name)
        return _ok({"signature_id": signature_id})

    @app.get("/documents/{doc_id}/template-match")
    async def get_template_match(doc_id: str):
        template_id, score = engine.match_document(doc_id)
        return _ok({"template_id": template_id, "score": score})

    return app
