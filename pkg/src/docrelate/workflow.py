"""Record, save, clear, and replay query sequences.

A workflow stores both the NL utterance and the compiled SQL for each
step; replay runs the compiled SQL verbatim with TEMP chaining. Keyword
anchors (static template words) resolve identically on a same-template
document, so textual replay realizes slot re-resolution; a step whose
anchor is missing from the target simply yields an empty, flagged result.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .errors import (DocrelateError, DuplicateName, EmptyRecording,
                     UnknownWorkflow)
from .query import execute_and_stage
from .relstore import Relation, RelationDB


@dataclass(frozen=True)
class WorkflowStep:
    utterance: str
    sql_text: str


@dataclass(frozen=True)
class Workflow:
    name: str
    steps: tuple[WorkflowStep, ...]
    template_id: str  # signature id of the authoring document, or "unknown"


@dataclass(frozen=True)
class StepResult:
    sql_text: str
    relation: Optional[Relation]
    empty: bool
    error: Optional[str] = None


@dataclass(frozen=True)
class ApplyOutcome:
    workflow: str
    steps: tuple[StepResult, ...]
    template_warning: Optional[str] = None


def _escape(text: str) -> str:
    return (text.replace("\\", "\\\\").replace("\t", "\\t")
            .replace("\n", "\\n").replace("\r", "\\r"))


def _unescape(text: str) -> str:
    out, i = [], 0
    while i < len(text):
        if text[i] == "\\" and i + 1 < len(text):
            out.append({"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}
                       .get(text[i + 1], text[i + 1]))
            i += 2
        else:
            out.append(text[i])
            i += 1
    return "".join(out)


class WorkflowRegistry:
    """Name-keyed store of saved workflows, optionally file-backed."""

    def __init__(self, directory: str | Path | None = None):
        self.directory = Path(directory) if directory else None
        self._workflows: dict[str, Workflow] = {}
        self._order: list[str] = []
        if self.directory and self.directory.exists():
            for path in sorted(self.directory.glob("*.workflow")):
                wf = load_workflow_file(path)
                self._workflows[wf.name] = wf
                self._order.append(wf.name)

    def names(self) -> list[str]:
        return list(self._order)

    def get(self, name: str) -> Workflow:
        try:
            return self._workflows[name]
        except KeyError:
            raise UnknownWorkflow(f"no workflow named {name!r}") from None

    def most_recent(self) -> Workflow:
        if not self._order:
            raise UnknownWorkflow("no workflow has been saved yet")
        return self._workflows[self._order[-1]]

    def add(self, workflow: Workflow) -> None:
        if workflow.name in self._workflows:
            raise DuplicateName(f"workflow {workflow.name!r} already exists")
        self._workflows[workflow.name] = workflow
        self._order.append(workflow.name)
        if self.directory:
            self.directory.mkdir(parents=True, exist_ok=True)
            save_workflow_file(workflow, self._path_for(workflow.name))

    def _path_for(self, name: str) -> Path:
        safe = re.sub(r"[^\w.-]", "_", name)
        return self.directory / f"{safe}.workflow"


def save_workflow_file(workflow: Workflow, path: str | Path) -> None:
    lines = [workflow.name, workflow.template_id]
    for step in workflow.steps:
        lines.append(f"STEP\t{_escape(step.utterance)}\t{_escape(step.sql_text)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_workflow_file(path: str | Path) -> Workflow:
    raw = Path(path).read_text(encoding="utf-8").splitlines()
    if len(raw) < 2:
        raise UnknownWorkflow(f"workflow file {path} is truncated")
    name, template_id = raw[0], raw[1]
    steps = []
    for line in raw[2:]:
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3 or parts[0] != "STEP":
            raise UnknownWorkflow(f"bad step line in {path}: {line!r}")
        steps.append(WorkflowStep(utterance=_unescape(parts[1]),
                                  sql_text=_unescape(parts[2])))
    return Workflow(name=name, steps=tuple(steps), template_id=template_id)


def record_step(session, utterance: str, sql_text: str) -> None:
    """Append a successfully executed extraction step to the recording."""
    session.recording.append(WorkflowStep(utterance=utterance, sql_text=sql_text))


def save_workflow(session, name: str, registry: WorkflowRegistry) -> Workflow:
    """Persist the session's recording under a fresh name.

    The recording is left intact so the user can keep extending it.
    """
    if not session.recording:
        raise EmptyRecording("nothing recorded yet; run an extraction query first")
    workflow = Workflow(name=name, steps=tuple(session.recording),
                        template_id=session.template_id)
    registry.add(workflow)
    return workflow


def clear_workflow(session) -> None:
    """Drop the recording and the session's TEMP relation."""
    session.recording.clear()
    session.db.clear_temp()


def apply_workflow(name: str, db: RelationDB, registry: WorkflowRegistry,
                   target_signature=None, template_registry=None,
                   tau: float = 0.6) -> ApplyOutcome:
    """Replay a saved workflow against a document, TEMP-chained.

    Steps run in order; a step that errors or yields no rows is flagged
    but does not abort the remainder. When the target's signature scores
    below tau against the authoring template, a warning is attached.
    """
    workflow = registry.get(name)

    warning = None
    if target_signature is not None and template_registry is not None \
            and workflow.template_id != "unknown":
        authored = template_registry.get_optional(workflow.template_id)
        if authored is not None:
            from .templates import signature_score
            score = signature_score(target_signature, authored)
            if score < tau:
                warning = (f"target document scores {score:.3f} against "
                           f"template {workflow.template_id!r} (threshold {tau})")

    db.clear_temp()
    results = []
    for step in workflow.steps:
        try:
            relation = execute_and_stage(step.sql_text, db)
            results.append(StepResult(sql_text=step.sql_text, relation=relation,
                                      empty=len(relation) == 0))
        except DocrelateError as exc:
            results.append(StepResult(sql_text=step.sql_text, relation=None,
                                      empty=True, error=str(exc)))
    return ApplyOutcome(workflow=name, steps=tuple(results),
                        template_warning=warning)
