"""Gazetteer and alias tables used for data typing and term canonicalization.

Gazetteers are plain UTF-8 text, one term per line, `#` comments allowed.
Alias files hold lines of `canonical = alias1, alias2, ...`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import LexiconLoadError

_DATA_DIR = Path(__file__).parent / "data"


def _read_lines(path: str | Path) -> list[str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise LexiconLoadError(f"cannot read lexicon {path}: {exc}") from exc
    return text.splitlines()


def load_gazetteer(path: str | Path) -> frozenset[str]:
    terms = set()
    for line in _read_lines(path):
        term = line.strip()
        if term and not term.startswith("#"):
            terms.add(term.lower())
    return frozenset(terms)


def parse_alias_lines(lines: list[str]) -> dict[str, str]:
    """Map lowercase alias -> canonical form; canonicals map to themselves."""
    table: dict[str, str] = {}
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise LexiconLoadError(f"alias line {lineno} lacks '=': {line!r}")
        canonical, _, rest = line.partition("=")
        canonical = canonical.strip()
        if not canonical:
            raise LexiconLoadError(f"alias line {lineno} has empty canonical")
        table[canonical.lower()] = canonical
        for alias in rest.split(","):
            alias = alias.strip()
            if alias:
                table[alias.lower()] = canonical
    return table


def load_aliases(path: str | Path) -> dict[str, str]:
    return parse_alias_lines(_read_lines(path))


@dataclass(frozen=True)
class Lexicons:
    cities: frozenset[str] = frozenset()
    countries: frozenset[str] = frozenset()
    aliases: dict[str, str] = field(default_factory=dict)

    @classmethod
    def load(cls, directory: str | Path) -> "Lexicons":
        """Load cities.txt / countries.txt / aliases.txt from a directory.

        Missing files load as empty lexicons; unreadable files raise.
        """
        directory = Path(directory)
        cities: frozenset[str] = frozenset()
        countries: frozenset[str] = frozenset()
        aliases: dict[str, str] = {}
        city_path = directory / "gazetteers" / "cities.txt"
        country_path = directory / "gazetteers" / "countries.txt"
        alias_path = directory / "aliases.txt"
        if city_path.exists():
            cities = load_gazetteer(city_path)
        if country_path.exists():
            countries = load_gazetteer(country_path)
        if alias_path.exists():
            aliases = load_aliases(alias_path)
        return cls(cities=cities, countries=countries, aliases=aliases)


def builtin_data_dir() -> Path:
    """Directory of the tiny demo lexicons shipped with the package."""
    return _DATA_DIR


def builtin_lexicons() -> Lexicons:
    return Lexicons.load(builtin_data_dir())


def canonicalize_alias(term: str, alias_table: dict[str, str]) -> str:
    """Resolve a term through the alias table; unknown terms pass through."""
    return alias_table.get(term.lower(), term)
