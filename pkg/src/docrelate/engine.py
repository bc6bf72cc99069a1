"""Shared pipeline facade used by both the HTTP service and the CLI, so
both front ends produce identical relations for identical inputs."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from pathlib import Path

from .config import DEFAULT_CONFIG, EngineConfig
from .entities import DocumentEntities, build_entities
from .errors import UnknownDocument, UnknownSession
from .ingest import RawDocument, ingest_document
from .lexicons import Lexicons, builtin_data_dir
from .nl import (Response, build_doc_lexicon, default_bookkeeping,
                 default_synonyms, handle_utterance, highlight_word_ids,
                 load_bookkeeping, load_synonyms)
from .query import evaluate_provenance, execute_and_stage, parse_sql
from .relstore import RelationDB, populate
from .session import SessionState
from .templates import (TemplateRegistry, compute_signature, match_template,
                        register_template)
from .workflow import ApplyOutcome, WorkflowRegistry, apply_workflow, record_step


@dataclass
class DocumentRecord:
    doc_id: str
    raw: RawDocument
    entities: DocumentEntities
    db: RelationDB


class DocEngine:
    """Holds ingested documents, sessions, and the two registries."""

    def __init__(self, data_dir: str | Path | None = None,
                 config: EngineConfig = DEFAULT_CONFIG):
        self.config = config
        self.data_dir = Path(data_dir) if data_dir else None
        lexicon_dir = builtin_data_dir()
        synonyms_path = None
        bookkeeping_path = None
        if self.data_dir:
            if (self.data_dir / "gazetteers").exists() or (self.data_dir / "aliases.txt").exists():
                lexicon_dir = self.data_dir
            if (self.data_dir / "synonyms.tsv").exists():
                synonyms_path = self.data_dir / "synonyms.tsv"
            if (self.data_dir / "bookkeeping.tsv").exists():
                bookkeeping_path = self.data_dir / "bookkeeping.tsv"
        self.lexicons = Lexicons.load(lexicon_dir)
        self.synonyms = (load_synonyms(synonyms_path) if synonyms_path
                         else default_synonyms())
        self.bookkeeping = (load_bookkeeping(bookkeeping_path) if bookkeeping_path
                            else default_bookkeeping())
        self.workflows = WorkflowRegistry(
            self.data_dir / "workflows" if self.data_dir else None)
        self.templates = TemplateRegistry(
            self.data_dir / "templates" if self.data_dir else None)
        self.documents: dict[str, DocumentRecord] = {}
        self.sessions: dict[str, SessionState] = {}
        self._doc_counter = itertools.count(1)
        self._session_counter = itertools.count(1)

    # --- documents ---------------------------------------------------------

    def ingest(self, ocr_payload: bytes, format: str,
               raster_payload: bytes | None = None,
               raster_format: str | None = None,
               doc_id: str | None = None) -> DocumentRecord:
        if doc_id is None:
            doc_id = f"doc-{next(self._doc_counter)}"
        raw = ingest_document(ocr_payload, format, raster_payload,
                              raster_format, self.config, doc_id=doc_id)
        entities = build_entities(raw, self.config, self.lexicons)
        db = populate(doc_id, entities)
        record = DocumentRecord(doc_id=doc_id, raw=raw, entities=entities, db=db)
        self.documents[doc_id] = record
        return record

    def get_document(self, doc_id: str) -> DocumentRecord:
        try:
            return self.documents[doc_id]
        except KeyError:
            raise UnknownDocument(f"no document {doc_id!r}") from None

    # --- sessions ----------------------------------------------------------

    def create_session(self, doc_id: str) -> SessionState:
        record = self.get_document(doc_id)
        session_id = f"s-{next(self._session_counter)}"
        sig = compute_signature(record.raw, record.entities,
                                grid_n=self.config.grid_n)
        template_id, _ = match_template(sig, self.templates,
                                        tau=self.config.template_tau)
        session = SessionState(
            session_id=session_id, doc_id=doc_id, db=record.db,
            entities=record.entities,
            lexicon_terms=build_doc_lexicon(record.entities, self.lexicons.aliases),
            aliases=self.lexicons.aliases,
            template_id=template_id)
        self.sessions[session_id] = session
        return session

    def get_session(self, session_id: str) -> SessionState:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise UnknownSession(f"no session {session_id!r}") from None

    # --- queries -------------------------------------------------------------

    def utterance(self, session_id: str, text: str) -> Response:
        session = self.get_session(session_id)
        return handle_utterance(text, session, workflows=self.workflows,
                                synonyms=self.synonyms,
                                bookkeeping=self.bookkeeping)

    def sql(self, session_id: str, text: str) -> Response:
        """Run raw SQL in a session: staged, recorded, and highlighted."""
        session = self.get_session(session_id)
        ast = parse_sql(text)
        provenance = evaluate_provenance(ast, session.db)
        relation = execute_and_stage(text, session.db)
        record_step(session, text, text)
        return Response(kind="result", message=f"{len(relation)} row(s)",
                        relation=relation, sql=text,
                        highlight_word_ids=highlight_word_ids(provenance, session))

    # --- workflows -------------------------------------------------------------

    def apply_workflow(self, name: str, doc_id: str) -> ApplyOutcome:
        record = self.get_document(doc_id)
        sig = compute_signature(record.raw, record.entities,
                                grid_n=self.config.grid_n)
        return apply_workflow(name, record.db, self.workflows,
                              target_signature=sig,
                              template_registry=self.templates,
                              tau=self.config.template_tau)

    # --- templates ---------------------------------------------------------------

    def register_template(self, doc_id: str, name: str) -> str:
        record = self.get_document(doc_id)
        return register_template(name, record.raw, record.entities,
                                 self.templates, grid_n=self.config.grid_n)

    def match_document(self, doc_id: str) -> tuple[str, float]:
        record = self.get_document(doc_id)
        sig = compute_signature(record.raw, record.entities,
                                grid_n=self.config.grid_n)
        return match_template(sig, self.templates, tau=self.config.template_tau)
