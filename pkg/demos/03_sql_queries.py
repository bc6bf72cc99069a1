"""Query the populated schema directly with the SQL subset.

Shows the four query shapes the NL front end composes, including TEMP
chaining for the multi-step account extraction.
"""

from docrelate import build_entities, execute_and_stage, ingest_document, populate
from docrelate.fixtures import fixture_path
from docrelate.lexicons import builtin_lexicons

doc = ingest_document(fixture_path("bank_a").read_bytes(), "jsonwords",
                      doc_id="bank_a")
db = populate("bank_a", build_entities(doc, lexicons=builtin_lexicons()))


def show(sql):
    relation = execute_and_stage(sql, db)
    print(f"\n>>> {sql}")
    for row in relation.rows:
        print("   ", row)
    return relation


# direct lookups
show('SELECT * FROM rightof WHERE anchor_text="SWIFT"')
show('SELECT key, value FROM key_value WHERE key="SWIFT"')
show('SELECT * FROM line_below_word WHERE word_text="DRAWEE"')

# the three-step account extraction: each result lands in TEMP
show('SELECT * FROM block_lines WHERE block_id='
     '(SELECT block_id FROM words WHERE text="remit")')
show('SELECT * FROM TEMP WHERE line_id='
     '(SELECT line_id FROM words WHERE text="Account")')
final = show('SELECT SUBSTR( line, pos("Account") ) FROM TEMP')
print(f"\naccount value extracted: {final.rows[0][0].strip()!r}")
