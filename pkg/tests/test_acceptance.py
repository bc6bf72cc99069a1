"""Acceptance suite: one test per criterion, each printing a PASS line
with its measured numbers when it completes within tolerance.

Run with: pytest tests/test_acceptance.py -v -s
"""

import json
import time

import numpy as np
import pytest

from docrelate.config import DEFAULT_CONFIG
from docrelate.corpus import evaluate_corpus, load_corpus
from docrelate.entities import (NULL_TEXT, block_pair_chains, build_entities,
                                cluster_blocks, cluster_lines,
                                compute_adjacency, median_word_height)
from docrelate.fixtures import (ACCOUNT_QUERY_SEQUENCE, BANK_A_ACCOUNT_VALUE,
                                BANK_B_ACCOUNT_VALUE, fixture_jsonwords,
                                gen_box_page, gen_template_doc)
from docrelate.ingest import BinaryRaster, RawDocument, ingest_document
from docrelate.lexicons import builtin_lexicons
from docrelate.nl import build_doc_lexicon, handle_utterance
from docrelate.query import evaluate, parse_sql, print_sql
from docrelate.raster_ops import connected_components, detect_boxes, erode
from docrelate.relstore import BASE_RELATIONS, populate
from docrelate.session import SessionState
from docrelate.templates import (TemplateRegistry, compute_signature,
                                 match_template, register_template)
from docrelate.workflow import WorkflowRegistry, apply_workflow, save_workflow

from differential import random_database, random_query, naive_eval
from test_differential import run_differential

LEXICONS = builtin_lexicons()


def build_fixture(name):
    doc = ingest_document(fixture_jsonwords(name), "jsonwords", doc_id=name)
    entities = build_entities(doc, DEFAULT_CONFIG, LEXICONS)
    return doc, entities, populate(name, entities)


def fresh_session(fixture_name, session_id="acc"):
    doc, entities, db = build_fixture(fixture_name)
    return SessionState(
        session_id=session_id, doc_id=fixture_name, db=db, entities=entities,
        lexicon_terms=build_doc_lexicon(entities, LEXICONS.aliases),
        aliases=LEXICONS.aliases)


def test_criterion_1_bank_fixture_adjacency():
    """Sample bank-document geometry: exact neighbor reproduction."""
    start = time.perf_counter()
    _, entities, _ = build_fixture("bank_a")
    adjacency = {(r.relation, r.anchor_text): r.neighbor_text
                 for r in compute_adjacency(entities.words)}
    assert adjacency[("leftof", "SREEPUR")] == "GILARCHALA"
    assert adjacency[("rightof", "SREEPUR")] == NULL_TEXT
    assert adjacency[("above", "SREEPUR")] == "COMPOSITE"
    assert adjacency[("below", "SREEPUR")] == "BANGLADESH"
    below = {r.word_text: r.below_line_text for r in entities.line_below}
    assert below["DRAWEE"] == "ABCD PRIVATE LIMITED"
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    print(f"\nPASS criterion 1: bank-fixture adjacency exact (leftof/rightof/above/"
          f"below + line-below) in {elapsed:.3f}s")


def test_criterion_2_box_detection():
    """20 synthetic rasters: every outline recovered, zero false positives."""
    start = time.perf_counter()
    rng = np.random.default_rng(20260810)
    pages = boxes_found = 0
    for i in range(20):
        raster, truth = gen_box_page(rng)
        detected = detect_boxes(raster, DEFAULT_CONFIG)
        assert len(detected) == len(truth), f"page {i}: {len(detected)} vs {len(truth)}"
        for want in truth:
            best = min(detected,
                       key=lambda b: sum(abs(g - w) for g, w in zip(b.bbox, want)))
            for got_edge, want_edge in zip(best.bbox, want):
                assert abs(got_edge - want_edge) <= 2, f"page {i}: {best.bbox} vs {want}"
        pages += 1
        boxes_found += len(detected)
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    print(f"\nPASS criterion 2: box detection {boxes_found} boxes over "
          f"{pages} pages, <=2 px per edge, 0 false positives, {elapsed:.2f}s")


def test_criterion_3_query_differential():
    """200 random queries x 20 random databases vs the naive evaluator."""
    start = time.perf_counter()
    checked = run_differential(n_dbs=20, n_queries=200, seed=20260810)
    elapsed = time.perf_counter() - start
    assert checked == 200
    assert elapsed < 30.0
    print(f"\nPASS criterion 3: 200 queries over 20 random databases agree "
          f"cell-for-cell with the naive evaluator, {elapsed:.2f}s")


def test_criterion_4_nl_corpus():
    """120-utterance corpus: 100/100 intent+table, >=90 template, >=96 values."""
    _, entities, _ = build_fixture("bank_a")
    terms = build_doc_lexicon(entities, LEXICONS.aliases)
    metrics = evaluate_corpus(load_corpus(), terms)
    assert metrics.total == 120
    assert metrics.intent_accuracy == 1.0
    assert metrics.table_accuracy == 1.0
    assert metrics.template_accuracy >= 0.90
    assert metrics.values_accuracy >= 0.96
    print(f"\nPASS criterion 4: corpus intent {metrics.intent_accuracy:.1%}, "
          f"table {metrics.table_accuracy:.1%}, "
          f"template {metrics.template_accuracy:.1%} (>=90%), "
          f"values {metrics.values_accuracy:.1%} (>=96%)")


def test_criterion_5_account_workflow_end_to_end():
    """Author on A, replay on same-template B, flag empty steps on C."""
    start = time.perf_counter()
    registry = WorkflowRegistry()

    session = fresh_session("bank_a")
    responses = [handle_utterance(u, session, registry)
                 for u in ACCOUNT_QUERY_SEQUENCE]
    assert all(r.kind == "result" for r in responses)
    authored = responses[-1].relation.rows
    assert len(authored) == 1 and BANK_A_ACCOUNT_VALUE in authored[0][0]
    save_workflow(session, "account-flow", registry)

    _, _, db_b = build_fixture("bank_b")
    outcome_b = apply_workflow("account-flow", db_b, registry)
    assert not any(s.empty for s in outcome_b.steps)
    final_b = outcome_b.steps[-1].relation.rows
    assert len(final_b) == 1 and BANK_B_ACCOUNT_VALUE in final_b[0][0]

    _, _, db_c = build_fixture("invoice_c")
    outcome_c = apply_workflow("account-flow", db_c, registry)
    assert outcome_c.steps[0].empty
    assert len(outcome_c.steps) == len(ACCOUNT_QUERY_SEQUENCE)

    elapsed = time.perf_counter() - start
    assert elapsed < 2.0
    print(f"\nPASS criterion 5: account workflow extracted "
          f"{BANK_A_ACCOUNT_VALUE} on A, {BANK_B_ACCOUNT_VALUE} on B, "
          f"flagged empty step on C, {elapsed:.2f}s")


def test_criterion_6_template_matching_analog():
    """9 synthetic templates x 3 jittered instances: >= 24/27 assigned."""
    start = time.perf_counter()
    registry = TemplateRegistry()
    master_rng = np.random.default_rng(123)
    for t in range(9):
        words = gen_template_doc(t, master_rng, jitter=0)
        page = (max(w.bbox[2] for w in words) + 1, max(w.bbox[3] for w in words) + 1)
        doc = RawDocument(doc_id=f"tmpl-{t}", words=words, page_size=page)
        register_template(f"tmpl-{t}", doc,
                          build_entities(doc, DEFAULT_CONFIG, LEXICONS), registry)

    instance_rng = np.random.default_rng(456)
    correct = 0
    for t in range(9):
        for _ in range(3):
            words = gen_template_doc(t, instance_rng, jitter=3)
            page = (max(w.bbox[2] for w in words) + 1, max(w.bbox[3] for w in words) + 1)
            doc = RawDocument(doc_id="probe", words=words, page_size=page)
            sig = compute_signature(doc, build_entities(doc, DEFAULT_CONFIG, LEXICONS))
            name, _ = match_template(sig, registry)
            correct += (name == f"tmpl-{t}")
    elapsed = time.perf_counter() - start
    assert correct >= 24
    assert elapsed < 5.0
    print(f"\nPASS criterion 6: template matching {correct}/27 "
          f"(needs >=24), {elapsed:.2f}s")


class TestCriterion7Invariants:
    """Property suites, >=200 random cases each, zero failures."""

    N = 200

    def random_words(self, rng, n_max=40):
        from docrelate.ingest import Word
        n = int(rng.integers(1, n_max))
        words = []
        for i in range(n):
            x0 = int(rng.integers(0, 300))
            y0 = int(rng.integers(0, 160))
            words.append(Word(word_id=i, text=f"w{i}",
                              bbox=(x0, y0, x0 + int(rng.integers(4, 50)),
                                    y0 + int(rng.integers(5, 16)))))
        return words

    def test_erosion_anti_extensive(self):
        rng = np.random.default_rng(1)
        for _ in range(self.N):
            h, w = int(rng.integers(2, 20)), int(rng.integers(2, 20))
            ink = rng.random((h, w)) < rng.uniform(0.1, 0.95)
            k = int(rng.choice([1, 3, 5, 7]))
            out = erode(BinaryRaster(w, h, ink), k)
            assert not np.any(out.ink & ~ink)
        print(f"\nPASS criterion 7a: erosion anti-extensivity, {self.N} cases")

    def test_cc_partition(self):
        rng = np.random.default_rng(2)
        for _ in range(self.N):
            h, w = int(rng.integers(2, 16)), int(rng.integers(2, 16))
            ink = rng.random((h, w)) < rng.uniform(0.2, 0.8)
            conn = int(rng.choice([4, 8]))
            comps = connected_components(BinaryRaster(w, h, ink), conn)
            seen = set()
            for c in comps:
                assert not (c.pixels & seen)
                seen |= c.pixels
            assert seen == {(int(x), int(y)) for y, x in zip(*np.nonzero(ink))}
        print(f"\nPASS criterion 7b: connected-component partition, {self.N} cases")

    def test_line_block_partition_and_predicates(self):
        rng = np.random.default_rng(3)
        for _ in range(self.N):
            words = self.random_words(rng)
            lines = cluster_lines(words, DEFAULT_CONFIG)
            assert sorted(w for l in lines for w in l.word_ids) \
                == sorted(w.word_id for w in words)
            by_id = {w.word_id: w for w in words}
            gap_max = DEFAULT_CONFIG.line_gap_factor * median_word_height(words)
            for line in lines:
                members = [by_id[i] for i in line.word_ids]
                assert line.text == " ".join(m.text for m in members)
                assert all(a.bbox[0] <= b.bbox[0] or a.word_id < b.word_id
                           for a, b in zip(members, members[1:]))
            blocks = cluster_blocks(lines, DEFAULT_CONFIG)
            assert sorted(l for b in blocks for l in b.line_ids) \
                == sorted(l.line_id for l in lines)
            line_by_id = {l.line_id: l for l in lines}
            x_tol = 0.75 * float(np.median([l.bbox[3] - l.bbox[1] for l in lines]))
            for block in blocks:
                members = [line_by_id[i] for i in block.line_ids]
                for upper, lower in zip(members, members[1:]):
                    assert block_pair_chains(upper, lower, x_tol)
        print(f"\nPASS criterion 7c: line/block partition + predicate "
              f"conformance, {self.N} cases")

    def test_adjacency_coordinate_soundness(self):
        rng = np.random.default_rng(4)
        for _ in range(self.N):
            words = self.random_words(rng)
            by_id = {w.word_id: w for w in words}
            for row in compute_adjacency(words, DEFAULT_CONFIG):
                if row.neighbor_word_id < 0:
                    continue
                a, b = by_id[row.anchor_word_id], by_id[row.neighbor_word_id]
                v_overlap = min(a.bbox[3], b.bbox[3]) - max(a.bbox[1], b.bbox[1])
                h_overlap = min(a.bbox[2], b.bbox[2]) - max(a.bbox[0], b.bbox[0])
                if row.relation == "rightof":
                    assert b.bbox[0] >= a.bbox[2] - 2
                    assert v_overlap >= 0.5 * min(a.height, b.height)
                elif row.relation == "leftof":
                    assert b.bbox[2] <= a.bbox[0] + 2
                    assert v_overlap >= 0.5 * min(a.height, b.height)
                elif row.relation == "above":
                    assert b.bbox[3] <= a.bbox[1] + 2
                    assert h_overlap >= 1
                else:
                    assert b.bbox[1] >= a.bbox[3] - 2
                    assert h_overlap >= 1
        print(f"\nPASS criterion 7d: adjacency coordinate soundness, {self.N} cases")

    def test_ast_round_trip(self):
        rng = np.random.default_rng(5)
        for _ in range(self.N):
            ast = random_query(rng)
            assert parse_sql(print_sql(ast)) == ast
        print(f"\nPASS criterion 7e: AST print/parse round trip, {self.N} cases")

    def test_populate_determinism(self):
        rng = np.random.default_rng(6)
        for _ in range(self.N):
            words = self.random_words(rng, n_max=25)
            payload = json.dumps([
                {"t": w.text, "x0": w.bbox[0], "y0": w.bbox[1],
                 "x1": w.bbox[2], "y1": w.bbox[3]} for w in words]).encode()
            doc = ingest_document(payload, "jsonwords", doc_id="p")
            first = populate("p", build_entities(doc, DEFAULT_CONFIG, LEXICONS))
            second = populate("p", build_entities(doc, DEFAULT_CONFIG, LEXICONS))
            for name in BASE_RELATIONS:
                assert first.get_table(name).rows == second.get_table(name).rows
        print(f"\nPASS criterion 7f: populate determinism, {self.N} cases")

    def test_replay_determinism(self):
        rng = np.random.default_rng(7)
        cases = 0
        while cases < self.N:
            db, tables, schemas = random_database(rng)
            steps = []
            for _ in range(int(rng.integers(1, 4))):
                ast = random_query(rng)
                try:
                    naive_eval(ast, tables, schemas)
                except ValueError:
                    continue
                if ast.table == "TEMP":
                    continue
                steps.append(print_sql(ast))
            if not steps:
                continue
            from docrelate.workflow import Workflow, WorkflowStep
            registry = WorkflowRegistry()
            registry.add(Workflow(
                name="w", template_id="unknown",
                steps=tuple(WorkflowStep(s, s) for s in steps)))
            first = apply_workflow("w", db, registry)
            second = apply_workflow("w", db, registry)
            for a, b in zip(first.steps, second.steps):
                assert (a.relation.rows if a.relation else None) \
                    == (b.relation.rows if b.relation else None)
                assert a.empty == b.empty
            cases += 1
        print(f"\nPASS criterion 7g: replay determinism, {cases} cases")


def test_criterion_8_performance_5000_words():
    """Ingest + entity build + populate a 5000-word page under 1 second."""
    rng = np.random.default_rng(1)
    items = []
    for row in range(100):
        x = 10
        for col in range(50):
            width = int(rng.integers(20, 60))
            items.append({"t": f"tok{row}_{col}", "x0": x, "y0": 20 + row * 18,
                          "x1": x + width, "y1": 32 + row * 18})
            x += width + 8
    payload = json.dumps(items).encode()
    assert len(items) == 5000

    start = time.perf_counter()
    doc = ingest_document(payload, "jsonwords", doc_id="perf")
    entities = build_entities(doc, DEFAULT_CONFIG, LEXICONS)
    populate("perf", entities)
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    print(f"\nPASS criterion 8: 5000-word ingest+entities+populate "
          f"in {elapsed:.3f}s (< 1 s)")
