"""Drive the conversational pipeline: utterances in, relations out.

Each extraction utterance is normalized, mapped to a template and table,
compiled to SQL, executed with TEMP staging, and recorded for replay.
"""

from docrelate import DocEngine
from docrelate.fixtures import fixture_path

engine = DocEngine()
engine.ingest(fixture_path("bank_a").read_bytes(), "jsonwords", doc_id="bank_a")
session = engine.create_session("bank_a")

utterances = [
    "Please get me the word towards right of SWIFT",
    "get me the value of SWIFT",
    "Kindly get the block information for the block containing the word remit",
    "Please get the line which has word Account in it from the previous result",
    "Get substring which is towards right of Account from the previous result",
    "save this sequence as account-flow",
    "list the workflows",
]

for utterance in utterances:
    response = engine.utterance(session.session_id, utterance)
    print(f"\n> {utterance}")
    if response.kind == "result":
        print(f"  sql: {response.sql}")
        for row in response.relation.rows:
            print(f"  row: {row}")
        if response.highlight_word_ids:
            words = {w.word_id: w.text for w in session.entities.words}
            print(f"  highlights: {[words[i] for i in response.highlight_word_ids]}")
    else:
        print(f"  [{response.kind}] {response.message}")
