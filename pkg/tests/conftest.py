import numpy as np
import pytest

from billfate.corpus import BillRecord, generate_synthetic_corpus, kenya_shaped_spec, synthetic_vocabulary
from billfate.embeddings import EmbeddingTable, generate_synthetic_embeddings


def make_bill(**kw):
    base = dict(id="b1", title="The Finance Bill, 2018", body="An act of parliament.",
                sponsor_name="Jane Doe", sponsor_kind="legislator", category="L1",
                year=2018, month=6, outcome="not_enacted")
    base.update(kw)
    return BillRecord(**base)


@pytest.fixture
def bill():
    return make_bill


@pytest.fixture(scope="session")
def kenya_spec():
    return kenya_shaped_spec()


@pytest.fixture(scope="session")
def kenya_corpus(kenya_spec):
    return generate_synthetic_corpus(kenya_spec, seed=7)


@pytest.fixture(scope="session")
def small_table(kenya_spec):
    return generate_synthetic_embeddings(synthetic_vocabulary(kenya_spec), 8, seed=1)


@pytest.fixture
def tiny_table():
    return EmbeddingTable.from_dict({"finance": [1.0, 0.0, 2.0], "bill": [3.0, 4.0, 0.0]})


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.LINES:
        terminalreporter.section("acceptance criteria")
        for line in mod.LINES:
            terminalreporter.write_line(line)
