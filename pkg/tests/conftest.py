import numpy as np
import pytest

from docrelate.config import DEFAULT_CONFIG
from docrelate.entities import build_entities
from docrelate.fixtures import fixture_jsonwords
from docrelate.ingest import ingest_document
from docrelate.lexicons import builtin_lexicons
from docrelate.relstore import populate


@pytest.fixture(scope="session")
def lexicons():
    return builtin_lexicons()


def _make_doc(name, lexicons):
    doc = ingest_document(fixture_jsonwords(name), "jsonwords", doc_id=name)
    entities = build_entities(doc, DEFAULT_CONFIG, lexicons)
    db = populate(name, entities)
    return doc, entities, db


@pytest.fixture(scope="session")
def bank_a(lexicons):
    return _make_doc("bank_a", lexicons)


@pytest.fixture(scope="session")
def bank_b(lexicons):
    return _make_doc("bank_b", lexicons)


@pytest.fixture(scope="session")
def invoice_c(lexicons):
    return _make_doc("invoice_c", lexicons)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
