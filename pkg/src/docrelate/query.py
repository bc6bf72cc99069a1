"""SQL-subset parser and evaluator.

Grammar (keywords case-insensitive):

    query        := SELECT select_list FROM ident [WHERE cond]
    select_list  := '*' | ident (',' ident)* | substr_call
    substr_call  := SUBSTR '(' ident ',' posexpr [',' posexpr_diff] ')'
    posexpr      := POS '(' string ')' [('+'|'-') integer]
    posexpr_diff := posexpr | POS '(' string ')' '-' POS '(' string ')'
    cond         := ident '=' literal | ident '=' '(' query ')'
    literal      := string | integer

pos("V") over a row is the 1-based index of the first occurrence of V in
the row's source column plus len(V), i.e. the start of the remainder, so
SUBSTR(line, pos("Account")) yields the text after "Account". Rows where
V does not occur are dropped.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Union

from .errors import (NonScalarSubquery, ParseError, TypeMismatch,
                     UnknownColumn)
from .relstore import INTEGER, TEXT, Relation, RelationDB, make_relation

KEYWORDS = frozenset({"SELECT", "FROM", "WHERE", "SUBSTR", "POS"})


# --- AST ----------------------------------------------------------------------

@dataclass(frozen=True)
class PosExpr:
    value: str
    offset: int = 0


@dataclass(frozen=True)
class PosDiff:
    end: PosExpr
    start: PosExpr


LenExpr = Union[PosExpr, PosDiff]


@dataclass(frozen=True)
class Eq:
    column: str
    literal: Union[str, int]


@dataclass(frozen=True)
class IdInSubquery:
    column: str
    subquery: "Select"


Cond = Union[Eq, IdInSubquery]


@dataclass(frozen=True)
class Select:
    columns: Optional[tuple[str, ...]]  # None = star
    table: str
    where: Optional[Cond] = None


@dataclass(frozen=True)
class SubstrSelect:
    source_col: str
    start: PosExpr
    length: Optional[LenExpr]
    table: str


QueryAST = Union[Select, SubstrSelect]


# --- tokenizer ------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<int>\d+)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<punct>[*(),=+-])
""", re.VERBOSE)

_ESCAPES = {'"': '"', "\\": "\\"}


@dataclass(frozen=True)
class _Token:
    kind: str  # IDENT, INT, STRING, or the punct char itself; EOF at end
    value: str
    pos: int
    index: int


def _unescape_string(raw: str, pos: int, index: int) -> str:
    body = raw[1:-1]
    out = []
    i = 0
    while i < len(body):
        c = body[i]
        if c == "\\":
            if i + 1 >= len(body) or body[i + 1] not in _ESCAPES:
                raise ParseError(f"bad escape in string literal at offset {pos}",
                                 pos, index, frozenset({'\\"', "\\\\"}))
            out.append(_ESCAPES[body[i + 1]])
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    index = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r} at offset {pos}",
                             pos, index, frozenset())
        if m.lastgroup == "ws":
            pos = m.end()
            continue
        value = m.group()
        if m.lastgroup == "ident":
            kind = "IDENT"
        elif m.lastgroup == "int":
            kind = "INT"
        elif m.lastgroup == "string":
            kind = "STRING"
            if not value.endswith('"') or len(value) < 2:
                raise ParseError(f"unterminated string at offset {pos}", pos,
                                 index, frozenset())
            value = _unescape_string(value, pos, index)
        else:
            kind = value
        tokens.append(_Token(kind, value, pos, index))
        pos = m.end()
        index += 1
    tokens.append(_Token("EOF", "", len(text), index))
    return tokens


# --- parser ---------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def error(self, expected: set[str]) -> ParseError:
        tok = self.peek()
        shown = tok.value or "end of input"
        return ParseError(
            f"at token {tok.index} ({shown!r}): expected one of "
            f"{sorted(expected)}", tok.pos, tok.index, frozenset(expected))

    def take(self, kind: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise self.error({kind})
        self.i += 1
        return tok

    def keyword(self, word: str) -> _Token:
        tok = self.peek()
        if tok.kind != "IDENT" or tok.value.upper() != word:
            raise self.error({word})
        self.i += 1
        return tok

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind == "IDENT" and tok.value.upper() == word

    def ident(self) -> str:
        tok = self.peek()
        if tok.kind != "IDENT" or tok.value.upper() in KEYWORDS:
            raise self.error({"identifier"})
        self.i += 1
        return tok.value

    def parse_query(self) -> QueryAST:
        self.keyword("SELECT")
        if self.peek().kind == "*":
            self.take("*")
            columns = None
            return self._finish_select(columns)
        if self.at_keyword("SUBSTR"):
            return self._parse_substr()
        cols = [self.ident()]
        while self.peek().kind == ",":
            self.take(",")
            cols.append(self.ident())
        return self._finish_select(tuple(cols))

    def _finish_select(self, columns: Optional[tuple[str, ...]]) -> Select:
        self.keyword("FROM")
        table = self.ident()
        where = None
        if self.at_keyword("WHERE"):
            self.keyword("WHERE")
            where = self._parse_cond()
        return Select(columns=columns, table=table, where=where)

    def _parse_substr(self) -> SubstrSelect:
        self.keyword("SUBSTR")
        self.take("(")
        source_col = self.ident()
        self.take(",")
        start = self._parse_posexpr()
        length: Optional[LenExpr] = None
        if self.peek().kind == ",":
            self.take(",")
            length = self._parse_posexpr_diff()
        self.take(")")
        self.keyword("FROM")
        table = self.ident()
        return SubstrSelect(source_col=source_col, start=start,
                            length=length, table=table)

    def _parse_pos_call(self) -> PosExpr:
        self.keyword("POS")
        self.take("(")
        value = self.take("STRING")
        self.take(")")
        return PosExpr(value=value.value)

    def _parse_posexpr(self) -> PosExpr:
        base = self._parse_pos_call()
        tok = self.peek()
        if tok.kind in ("+", "-") and self.tokens[self.i + 1].kind == "INT":
            self.i += 1
            amount = int(self.take("INT").value)
            return PosExpr(value=base.value,
                           offset=amount if tok.kind == "+" else -amount)
        return base

    def _parse_posexpr_diff(self) -> LenExpr:
        first = self._parse_pos_call()
        tok = self.peek()
        if tok.kind == "-" and self.tokens[self.i + 1].kind == "IDENT" \
                and self.tokens[self.i + 1].value.upper() == "POS":
            self.take("-")
            second = self._parse_pos_call()
            return PosDiff(end=first, start=second)
        if tok.kind in ("+", "-"):
            self.i += 1
            amount = int(self.take("INT").value)
            return PosExpr(value=first.value,
                           offset=amount if tok.kind == "+" else -amount)
        return first

    def _parse_literal(self) -> Union[str, int]:
        tok = self.peek()
        if tok.kind == "STRING":
            self.i += 1
            return tok.value
        if tok.kind == "INT":
            self.i += 1
            return int(tok.value)
        if tok.kind == "-" and self.tokens[self.i + 1].kind == "INT":
            self.i += 1
            return -int(self.take("INT").value)
        raise self.error({"STRING", "INT"})

    def _parse_cond(self) -> Cond:
        column = self.ident()
        self.take("=")
        if self.peek().kind == "(":
            self.take("(")
            sub = self.parse_query()
            if not isinstance(sub, Select):
                raise ParseError("subquery must be a plain SELECT",
                                 self.peek().pos, self.peek().index,
                                 frozenset({"SELECT"}))
            self.take(")")
            return IdInSubquery(column=column, subquery=sub)
        return Eq(column=column, literal=self._parse_literal())

    def parse(self) -> QueryAST:
        ast = self.parse_query()
        tok = self.peek()
        if tok.kind != "EOF":
            raise self.error({"EOF"})
        return ast


def parse_sql(text: str) -> QueryAST:
    """Parse one statement; raises ParseError with position and expected set."""
    return _Parser(text).parse()


# --- printer --------------------------------------------------------------------

def _print_literal(lit: Union[str, int]) -> str:
    if isinstance(lit, str):
        escaped = lit.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    return str(lit)


def _print_pos(p: PosExpr) -> str:
    base = f"pos({_print_literal(p.value)})"
    if p.offset > 0:
        return f"{base}+{p.offset}"
    if p.offset < 0:
        return f"{base}{p.offset}"
    return base


def print_sql(ast: QueryAST) -> str:
    """Render an AST to canonical query text that reparses to an equal AST."""
    if isinstance(ast, SubstrSelect):
        args = [ast.source_col, _print_pos(ast.start)]
        if ast.length is not None:
            if isinstance(ast.length, PosDiff):
                args.append(f"{_print_pos(ast.length.end)}-{_print_pos(ast.length.start)}")
            else:
                args.append(_print_pos(ast.length))
        return f"SELECT SUBSTR( {', '.join(args)} ) FROM {ast.table}"
    cols = "*" if ast.columns is None else ", ".join(ast.columns)
    sql = f"SELECT {cols} FROM {ast.table}"
    if ast.where is not None:
        if isinstance(ast.where, Eq):
            sql += f" WHERE {ast.where.column}={_print_literal(ast.where.literal)}"
        else:
            sql += f" WHERE {ast.where.column}=({print_sql(ast.where.subquery)})"
    return sql


# --- evaluator ------------------------------------------------------------------

def _column_index(rel: Relation, name: str) -> int:
    try:
        return rel.column_index(name)
    except KeyError:
        raise UnknownColumn(
            f"no column {name!r} in {rel.name} "
            f"(has {', '.join(rel.column_names)})") from None


def _literal_type(lit: Union[str, int]) -> str:
    return TEXT if isinstance(lit, str) else INTEGER


def _filter_rows(rel: Relation, cond: Optional[Cond], db: RelationDB) -> list[tuple]:
    if cond is None:
        return list(rel.rows)
    idx = _column_index(rel, cond.column)
    col_type = rel.columns[idx][1]
    if isinstance(cond, Eq):
        if _literal_type(cond.literal) != col_type:
            raise TypeMismatch(
                f"column {cond.column} is {col_type}, literal "
                f"{cond.literal!r} is {_literal_type(cond.literal)}")
        return [row for row in rel.rows if row[idx] == cond.literal]
    inner = evaluate(cond.subquery, db)
    if len(inner.columns) != 1:
        raise NonScalarSubquery(
            f"subquery yields {len(inner.columns)} columns, need exactly 1")
    if inner.columns[0][1] != col_type:
        raise TypeMismatch(
            f"column {cond.column} is {col_type}, subquery column "
            f"{inner.columns[0][0]} is {inner.columns[0][1]}")
    wanted = {row[0] for row in inner.rows}
    return [row for row in rel.rows if row[idx] in wanted]


def _pos_in(s: str, p: PosExpr) -> Optional[int]:
    """1-based start of the text after the first occurrence of p.value."""
    at = s.find(p.value)
    if at < 0:
        return None
    return at + 1 + len(p.value) + p.offset


def _eval_substr_row(s: str, start: PosExpr, length: Optional[LenExpr]) -> Optional[str]:
    begin = _pos_in(s, start)
    if begin is None:
        return None
    begin0 = max(begin - 1, 0)
    if length is None:
        return s[begin0:]
    if isinstance(length, PosDiff):
        end_pos = _pos_in(s, length.end)
        start_pos = _pos_in(s, length.start)
        if end_pos is None or start_pos is None:
            return None
        count = end_pos - start_pos
    else:
        count = _pos_in(s, length)
        if count is None:
            return None
    if count <= 0:
        return ""
    return s[begin0:begin0 + count]


def evaluate(ast: QueryAST, db: RelationDB) -> Relation:
    """Run a parsed query against the store; never mutates base relations."""
    rel = db.get_table(ast.table)
    if isinstance(ast, SubstrSelect):
        idx = _column_index(rel, ast.source_col)
        if rel.columns[idx][1] != TEXT:
            raise TypeMismatch(f"SUBSTR source column {ast.source_col} must be text")
        out = []
        for row in rel.rows:
            piece = _eval_substr_row(row[idx], ast.start, ast.length)
            if piece is not None:
                out.append((piece,))
        return make_relation("result", (("result", TEXT),), out)

    rows = _filter_rows(rel, ast.where, db)
    if ast.columns is None:
        return make_relation("result", rel.columns, rows)
    indices = [_column_index(rel, c) for c in ast.columns]
    columns = tuple(rel.columns[i] for i in indices)
    projected = [tuple(row[i] for i in indices) for row in rows]
    return make_relation("result", columns, projected)


def evaluate_provenance(ast: QueryAST, db: RelationDB) -> Relation:
    """The filtered source rows behind a query result, before projection.

    For substring queries these are the rows whose source text contained
    the anchor; for plain selects, the filtered rows with all columns.
    Used to trace a result back to the words that produced it.
    """
    rel = db.get_table(ast.table)
    if isinstance(ast, SubstrSelect):
        idx = _column_index(rel, ast.source_col)
        if rel.columns[idx][1] != TEXT:
            raise TypeMismatch(f"SUBSTR source column {ast.source_col} must be text")
        rows = [row for row in rel.rows
                if _eval_substr_row(row[idx], ast.start, ast.length) is not None]
        return make_relation("provenance", rel.columns, rows)
    rows = _filter_rows(rel, ast.where, db)
    return make_relation("provenance", rel.columns, rows)


def execute_and_stage(text: str, db: RelationDB) -> Relation:
    """Parse, evaluate, then stage the result as TEMP (atomic on error)."""
    ast = parse_sql(text)
    result = evaluate(ast, db)
    db.stage_temp(result)
    return result
