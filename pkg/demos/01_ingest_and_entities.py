"""Walk the entity-derivation pipeline over the bundled bank document.

Parses the jsonwords fixture, clusters words into lines and blocks, and
prints the spatial neighborhoods that later power extraction queries.
"""

from docrelate import build_entities, ingest_document
from docrelate.fixtures import fixture_path
from docrelate.lexicons import builtin_lexicons

payload = fixture_path("bank_a").read_bytes()
doc = ingest_document(payload, "jsonwords", doc_id="bank_a")
print(f"{len(doc.words)} words on a {doc.page_size[0]}x{doc.page_size[1]} page\n")

entities = build_entities(doc, lexicons=builtin_lexicons())

print("page lines (y-ordered):")
for line in entities.lines:
    print(f"  [{line.line_id}] block={line.block_id:>2}  {line.text!r}")

print("\ntext blocks:")
for block in entities.blocks:
    texts = [l.text for l in entities.lines if l.block_id == block.block_id]
    print(f"  [{block.block_id}] {texts}")

print("\nneighborhood of SREEPUR (the address cluster):")
for row in entities.adjacency:
    if row.anchor_text == "SREEPUR":
        print(f"  {row.relation:<8} -> {row.neighbor_text}")

print("\nline below each word of the DRAWEE block:")
for row in entities.line_below:
    if row.block_id == 4:
        print(f"  {row.word_text:<8} -> {row.below_line_text!r}")

print("\nkey-value pairs (colon lines):")
for kv in entities.key_values:
    print(f"  {kv.key_text!r}: {kv.value_text!r}")

print("\ntyped words (variable content):")
for t in entities.typed_words:
    if t.data_type != "NONE":
        word = next(w for w in entities.words if w.word_id == t.word_id)
        print(f"  {word.text:<12} {t.data_type}")
