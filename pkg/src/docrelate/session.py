"""Per-session state: one active document, its TEMP slot, and the query
recording. Sessions never share TEMP."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .entities import DocumentEntities
from .relstore import RelationDB
from .workflow import WorkflowStep


@dataclass
class SessionState:
    session_id: str
    doc_id: str
    db: RelationDB
    entities: DocumentEntities
    lexicon_terms: frozenset[str] = frozenset()
    aliases: dict[str, str] = field(default_factory=dict)
    recording: list[WorkflowStep] = field(default_factory=list)
    template_id: str = "unknown"
    created_at: float = field(default_factory=time.time)
