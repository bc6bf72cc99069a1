"""Command-line front end.

Exit codes: 0 success, 1 pipeline error, 2 usage error. Query results
print as tab-separated rows on stdout.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .engine import DocEngine
from .errors import DocrelateError
from .relstore import Relation, dump_db

_FORMAT_BY_SUFFIX = {".tsv": "tsv", ".hocr": "hocr", ".html": "hocr",
                     ".json": "jsonwords", ".jsonwords": "jsonwords"}


def _data_dir(args) -> str | None:
    return args.data or os.environ.get("DOCRELATE_DATA")


def _detect_format(path: Path, explicit: str | None) -> str:
    if explicit:
        return explicit
    return _FORMAT_BY_SUFFIX.get(path.suffix.lower(), "jsonwords")


def _ingest_from_args(engine: DocEngine, ocr_path: str, image: str | None,
                      format: str | None) -> str:
    path = Path(ocr_path)
    payload = path.read_bytes()
    raster_payload = Path(image).read_bytes() if image else None
    record = engine.ingest(payload, _detect_format(path, format),
                           raster_payload, doc_id=path.stem)
    return record.doc_id


def _print_relation(relation: Relation) -> None:
    for row in relation.rows:
        print("\t".join(str(cell) for cell in row))


def _print_response(resp) -> int:
    if resp.kind == "error":
        print(f"error [{resp.stage}]: {resp.message}", file=sys.stderr)
        return 1
    if resp.relation is not None:
        _print_relation(resp.relation)
    elif resp.message:
        print(resp.message)
    return 0


def cmd_ingest(args) -> int:
    engine = DocEngine(data_dir=_data_dir(args))
    doc_id = _ingest_from_args(engine, args.ocr, args.image, args.format)
    record = engine.get_document(doc_id)
    out_dir = dump_db(record.db, args.out)
    ents = record.entities
    print(f"{doc_id}\twords={len(ents.words)}\tlines={len(ents.lines)}"
          f"\tblocks={len(ents.blocks)}\tboxes={len(ents.boxes)}\t{out_dir}")
    return 0


def cmd_query(args) -> int:
    engine = DocEngine(data_dir=_data_dir(args))
    doc_id = _ingest_from_args(engine, args.doc, args.image, args.format)
    session = engine.create_session(doc_id)
    if args.sql:
        resp = engine.sql(session.session_id, args.sql)
    else:
        resp = engine.utterance(session.session_id, args.nl)
    return _print_response(resp)


def cmd_repl(args) -> int:
    engine = DocEngine(data_dir=_data_dir(args))
    doc_id = _ingest_from_args(engine, args.doc, args.image, args.format)
    session = engine.create_session(doc_id)
    print(f"document {doc_id} loaded; type an utterance, or 'exit'")
    while True:
        try:
            line = input("> ").strip()
        except EOFError:
            break
        if not line:
            continue
        if line.lower() in ("exit", "quit"):
            break
        if line.lower().startswith("sql "):
            try:
                resp = engine.sql(session.session_id, line[4:])
            except DocrelateError as exc:
                print(f"error: {exc}", file=sys.stderr)
                continue
        else:
            resp = engine.utterance(session.session_id, line)
        _print_response(resp)
    return 0


def cmd_workflow(args) -> int:
    engine = DocEngine(data_dir=_data_dir(args))
    if args.action == "list":
        for name in engine.workflows.names():
            wf = engine.workflows.get(name)
            print(f"{wf.name}\t{len(wf.steps)}\t{wf.template_id}")
        return 0
    if args.action == "save":
        if not args.doc or not args.steps:
            print("workflow save needs --doc and --steps", file=sys.stderr)
            return 2
        doc_id = _ingest_from_args(engine, args.doc, args.image, args.format)
        session = engine.create_session(doc_id)
        for line in Path(args.steps).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            resp = engine.utterance(session.session_id, line)
            if resp.kind == "error":
                print(f"error [{resp.stage}]: {resp.message}", file=sys.stderr)
                return 1
        from .workflow import save_workflow
        wf = save_workflow(session, args.name, engine.workflows)
        print(f"{wf.name}\t{len(wf.steps)}")
        return 0
    if args.action == "apply":
        if not args.doc:
            print("workflow apply needs --doc", file=sys.stderr)
            return 2
        doc_id = _ingest_from_args(engine, args.doc, args.image, args.format)
        outcome = engine.apply_workflow(args.name, doc_id)
        if outcome.template_warning:
            print(f"warning: {outcome.template_warning}", file=sys.stderr)
        for i, step in enumerate(outcome.steps):
            status = "empty" if step.empty else f"{len(step.relation)} row(s)"
            print(f"step {i + 1}\t{status}\t{step.sql_text}")
            if step.relation is not None:
                _print_relation(step.relation)
        return 0
    print(f"unknown workflow action {args.action!r}", file=sys.stderr)
    return 2


def cmd_template(args) -> int:
    engine = DocEngine(data_dir=_data_dir(args))
    doc_id = _ingest_from_args(engine, args.doc, args.image, args.format)
    if args.action == "register":
        signature_id = engine.register_template(doc_id, args.name)
        print(signature_id)
        return 0
    if args.action == "match":
        template_id, score = engine.match_document(doc_id)
        print(f"{template_id}\t{score:.4f}")
        return 0
    print(f"unknown template action {args.action!r}", file=sys.stderr)
    return 2


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    app = create_app(data_dir=_data_dir(args), ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="docrelate",
        description="document relation extraction: OCR words to queryable spatial relations")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--data", help="data directory (or env DOCRELATE_DATA)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common],
                       help="parse OCR output and dump the relational schema")
    p.add_argument("ocr")
    p.add_argument("--image")
    p.add_argument("--format", choices=("tsv", "hocr", "jsonwords"))
    p.add_argument("--out", default="db")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("query", parents=[common], help="run one SQL or NL query against a document")
    p.add_argument("doc")
    p.add_argument("--image")
    p.add_argument("--format", choices=("tsv", "hocr", "jsonwords"))
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--sql")
    group.add_argument("--nl")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("repl", parents=[common], help="interactive conversational console")
    p.add_argument("doc")
    p.add_argument("--image")
    p.add_argument("--format", choices=("tsv", "hocr", "jsonwords"))
    p.set_defaults(func=cmd_repl)

    p = sub.add_parser("workflow", parents=[common], help="save, apply, or list workflows")
    p.add_argument("action", choices=("save", "apply", "list"))
    p.add_argument("name", nargs="?")
    p.add_argument("--doc")
    p.add_argument("--image")
    p.add_argument("--format", choices=("tsv", "hocr", "jsonwords"))
    p.add_argument("--steps", help="file with one utterance per line (save)")
    p.set_defaults(func=cmd_workflow)

    p = sub.add_parser("template", parents=[common], help="register a template or match a document")
    p.add_argument("action", choices=("register", "match"))
    p.add_argument("doc")
    p.add_argument("name", nargs="?")
    p.add_argument("--image")
    p.add_argument("--format", choices=("tsv", "hocr", "jsonwords"))
    p.set_defaults(func=cmd_template)

    p = sub.add_parser("serve", parents=[common], help="run the HTTP API")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui", help="directory with the built workbench (served at /ui)")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "workflow" and args.action in ("save", "apply") and not args.name:
        parser.error("workflow save/apply needs a name")
    if args.command == "template" and args.action == "register" and not args.name:
        parser.error("template register needs a name")
    try:
        return args.func(args)
    except DocrelateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
