import pytest

from docrelate.errors import (NonScalarSubquery, ParseError, TypeMismatch,
                              UnknownColumn, UnknownTable)
from docrelate.query import (Eq, IdInSubquery, PosDiff, PosExpr, Select,
                             SubstrSelect, evaluate, execute_and_stage,
                             parse_sql, print_sql)
from docrelate.relstore import INTEGER, TEXT, RelationDB, make_relation


def db_with(**tables):
    relations = {}
    for name, (columns, rows) in tables.items():
        relations[name] = make_relation(name, columns, rows)
    return RelationDB(doc_id="t", relations=relations)


KV = ((("key", TEXT), ("value", TEXT)),
      [("SWIFT", "SCBLUS33"), ("Account No", "123456")])


class TestParser:
    def test_star_select_with_eq(self):
        ast = parse_sql('SELECT * FROM rightof WHERE anchor_text="SWIFT"')
        assert ast == Select(columns=None, table="rightof",
                             where=Eq("anchor_text", "SWIFT"))

    def test_substr_with_length_difference(self):
        ast = parse_sql('SELECT SUBSTR( line, pos("Account"), pos("END")-pos("Account") ) FROM TEMP')
        assert ast == SubstrSelect(
            source_col="line", start=PosExpr("Account"),
            length=PosDiff(end=PosExpr("END"), start=PosExpr("Account")),
            table="TEMP")

    def test_parse_error_position(self):
        with pytest.raises(ParseError) as err:
            parse_sql("SELEKT foo")
        assert err.value.token_index == 0
        assert "SELECT" in err.value.expected

    def test_column_list(self):
        ast = parse_sql("SELECT key, value FROM key_value")
        assert ast.columns == ("key", "value")

    def test_subquery_cond(self):
        ast = parse_sql('SELECT * FROM lines WHERE line_id=(SELECT line_id FROM words WHERE text="x")')
        assert isinstance(ast.where, IdInSubquery)
        assert ast.where.subquery.table == "words"

    def test_pos_offset(self):
        ast = parse_sql('SELECT SUBSTR( line, pos("A")+2 ) FROM TEMP')
        assert ast.start == PosExpr("A", offset=2)
        ast = parse_sql('SELECT SUBSTR( line, pos("A")-1 ) FROM TEMP')
        assert ast.start == PosExpr("A", offset=-1)

    def test_string_escapes(self):
        ast = parse_sql('SELECT * FROM t WHERE c="a\\"b\\\\c"')
        assert ast.where.literal == 'a"b\\c'

    def test_negative_integer_literal(self):
        ast = parse_sql("SELECT * FROM rightof WHERE neighbor_id=-1")
        assert ast.where.literal == -1

    def test_keywords_case_insensitive(self):
        ast = parse_sql('select * from words where text="x"')
        assert ast.table == "words"

    def test_trailing_garbage_rejected(self):
        with pytest.raises(ParseError):
            parse_sql("SELECT * FROM words extra")

    @pytest.mark.parametrize("bad", [
        "", "SELECT", "SELECT *", "SELECT * FROM", "SELECT * FROM t WHERE",
        "SELECT * FROM t WHERE c=", 'SELECT SUBSTR( ) FROM t',
        'SELECT SUBSTR( line, "A" ) FROM t', "SELECT *, x FROM t",
        'SELECT * FROM t WHERE c=(SELECT * FROM u',
    ])
    def test_rejects_malformed(self, bad):
        with pytest.raises(ParseError):
            parse_sql(bad)


AST_CASES = [
    Select(columns=None, table="words", where=None),
    Select(columns=("a", "b"), table="t", where=Eq("a", 7)),
    Select(columns=None, table="t", where=Eq("s", 'quoted "text" \\ here')),
    Select(columns=None, table="outer",
           where=IdInSubquery("line_id",
                              Select(columns=("line_id",), table="words",
                                     where=Eq("text", "V")))),
    SubstrSelect(source_col="line", start=PosExpr("Account"), length=None,
                 table="TEMP"),
    SubstrSelect(source_col="line", start=PosExpr("A", offset=3),
                 length=PosExpr("B", offset=-2), table="TEMP"),
    SubstrSelect(source_col="text", start=PosExpr("A"),
                 length=PosDiff(end=PosExpr("B"), start=PosExpr("A")),
                 table="lines"),
    Select(columns=None, table="rightof", where=Eq("neighbor_id", -1)),
]


class TestPrinterRoundTrip:
    @pytest.mark.parametrize("ast", AST_CASES)
    def test_fixed_cases(self, ast):
        assert parse_sql(print_sql(ast)) == ast

    def test_random_asts(self, rng):
        # alphabet includes quoting hazards
        alphabet = list("abXY \"\\'0:")
        for _ in range(200):
            value = "".join(rng.choice(alphabet, size=rng.integers(1, 8)))
            offset = int(rng.integers(-3, 4))
            if rng.random() < 0.5:
                length = None if rng.random() < 0.5 else PosExpr(value[::-1] or "x")
                ast = SubstrSelect(source_col="line", start=PosExpr(value, offset),
                                   length=length, table="TEMP")
            else:
                literal = value if rng.random() < 0.5 else int(rng.integers(-99, 99))
                ast = Select(columns=None, table="t", where=Eq("c", literal))
            assert parse_sql(print_sql(ast)) == ast


class TestEvaluate:
    def test_key_value_lookup(self):
        db = db_with(key_value=KV)
        rel = evaluate(parse_sql('SELECT value FROM key_value WHERE key="SWIFT"'), db)
        assert rel.rows == (("SCBLUS33",),)

    def test_substr_after_anchor(self):
        db = db_with(TEMP=(
            (("line", TEXT),), [("Account No: 123456",)]))
        db.stage_temp(db.relations.pop("TEMP"))
        rel = evaluate(parse_sql('SELECT SUBSTR( line, pos("Account") ) FROM TEMP'), db)
        assert rel.rows == ((" No: 123456",),)

    def test_no_match_empty(self):
        db = db_with(words=((("word_id", INTEGER), ("text", TEXT)),
                            [(0, "a"), (1, "b")]))
        rel = evaluate(parse_sql('SELECT * FROM words WHERE text="zzz"'), db)
        assert rel.rows == ()

    def test_unknown_table(self):
        with pytest.raises(UnknownTable):
            evaluate(parse_sql("SELECT * FROM nope"), db_with())

    def test_unknown_column(self):
        db = db_with(words=((("text", TEXT),), [("a",)]))
        with pytest.raises(UnknownColumn):
            evaluate(parse_sql('SELECT * FROM words WHERE missing="x"'), db)
        with pytest.raises(UnknownColumn):
            evaluate(parse_sql("SELECT missing FROM words"), db)

    def test_type_mismatch(self):
        db = db_with(words=((("word_id", INTEGER), ("text", TEXT)), [(0, "a")]))
        with pytest.raises(TypeMismatch):
            evaluate(parse_sql('SELECT * FROM words WHERE word_id="x"'), db)
        with pytest.raises(TypeMismatch):
            evaluate(parse_sql("SELECT * FROM words WHERE text=3"), db)
        with pytest.raises(TypeMismatch):
            evaluate(parse_sql('SELECT SUBSTR( word_id, pos("a") ) FROM words'), db)

    def test_empty_subquery_empty_result(self):
        db = db_with(
            words=((("line_id", INTEGER), ("text", TEXT)), [(5, "a")]),
            lines=((("line_id", INTEGER), ("text", TEXT)), [(5, "a line")]))
        rel = evaluate(parse_sql(
            'SELECT * FROM lines WHERE line_id=(SELECT line_id FROM words WHERE text="nope")'), db)
        assert rel.rows == ()

    def test_non_scalar_subquery(self):
        db = db_with(
            words=((("line_id", INTEGER), ("text", TEXT)), [(5, "a")]),
            lines=((("line_id", INTEGER), ("text", TEXT)), [(5, "x")]))
        with pytest.raises(NonScalarSubquery):
            evaluate(parse_sql(
                'SELECT * FROM lines WHERE line_id=(SELECT * FROM words WHERE text="a")'), db)

    def test_subquery_type_mismatch(self):
        db = db_with(
            words=((("line_id", INTEGER), ("text", TEXT)), [(5, "a")]),
            lines=((("line_id", INTEGER), ("text", TEXT)), [(5, "x")]))
        with pytest.raises(TypeMismatch):
            evaluate(parse_sql(
                'SELECT * FROM lines WHERE line_id=(SELECT text FROM words WHERE text="a")'), db)

    def test_missing_pos_drops_row(self):
        db = db_with(lines=((("text", TEXT),),
                            [("has Account here",), ("no anchor",)]))
        rel = evaluate(parse_sql('SELECT SUBSTR( text, pos("Account") ) FROM lines'), db)
        assert rel.rows == ((" here",),)

    def test_substr_between(self):
        db = db_with(lines=((("text", TEXT),), [("xxA mid Bzz",)]))
        rel = evaluate(parse_sql(
            'SELECT SUBSTR( text, pos("A"), pos("B")-pos("A") ) FROM lines'), db)
        # pos("A") = 4 (after the match), pos("B") = 10; length 6 spans " mid B"
        assert rel.rows == ((" mid B",),)

    def test_evaluation_pure_on_base(self, bank_a):
        _, _, db = bank_a
        before = {n: db.get_table(n).rows for n in db.relations}
        evaluate(parse_sql('SELECT * FROM words WHERE text="SREEPUR"'), db)
        for n, rows in before.items():
            assert db.get_table(n).rows == rows


class TestExecuteAndStage:
    def test_chaining(self, bank_a):
        _, _, db = bank_a
        db.clear_temp()
        execute_and_stage('SELECT * FROM lines', db)
        assert len(db.get_table("TEMP")) == len(db.get_table("lines"))
        execute_and_stage('SELECT text FROM TEMP WHERE line_id=0', db)
        assert db.get_table("TEMP").rows == (("SWIFT: SCBLUS33",),)
        db.clear_temp()

    def test_parse_failure_leaves_temp(self, bank_a):
        _, _, db = bank_a
        db.clear_temp()
        execute_and_stage("SELECT * FROM lines", db)
        before = db.get_table("TEMP").rows
        with pytest.raises(ParseError):
            execute_and_stage("SELEKT nope", db)
        assert db.get_table("TEMP").rows == before
        db.clear_temp()

    def test_eval_failure_leaves_temp(self, bank_a):
        _, _, db = bank_a
        db.clear_temp()
        execute_and_stage("SELECT * FROM lines", db)
        before = db.get_table("TEMP").rows
        with pytest.raises(UnknownTable):
            execute_and_stage("SELECT * FROM nothere", db)
        assert db.get_table("TEMP").rows == before
        db.clear_temp()


class TestFilterSoundness:
    def test_eq_rows_satisfy_predicate(self, bank_a):
        _, _, db = bank_a
        rel = evaluate(parse_sql('SELECT * FROM rightof WHERE anchor_text="SWIFT"'), db)
        idx = rel.column_index("anchor_text")
        assert rel.rows and all(row[idx] == "SWIFT" for row in rel.rows)
