"""Author a workflow on one document, replay it on two others.

bank_b shares bank_a's template, so the saved query sequence extracts its
account number verbatim; invoice_c lacks the anchor words, so every step
comes back empty but flagged, never crashing.
"""

from docrelate import DocEngine
from docrelate.fixtures import ACCOUNT_QUERY_SEQUENCE, fixture_path

engine = DocEngine()
for name in ("bank_a", "bank_b", "invoice_c"):
    engine.ingest(fixture_path(name).read_bytes(), "jsonwords", doc_id=name)

engine.register_template("bank_a", "bank")

session = engine.create_session("bank_a")
print("authoring on bank_a:")
for utterance in ACCOUNT_QUERY_SEQUENCE:
    response = engine.utterance(session.session_id, utterance)
    print(f"  {utterance!r}\n    -> {response.relation.rows}")
engine.utterance(session.session_id, "save this sequence as account-flow")

for target in ("bank_b", "invoice_c"):
    outcome = engine.apply_workflow("account-flow", target)
    print(f"\nreplay on {target}"
          + (f"  (warning: {outcome.template_warning})" if outcome.template_warning else ""))
    for i, step in enumerate(outcome.steps, start=1):
        status = "EMPTY" if step.empty else f"{len(step.relation)} row(s)"
        print(f"  step {i}: {status}")
        if step.relation is not None and step.relation.rows:
            print(f"          {step.relation.rows[-1]}")
