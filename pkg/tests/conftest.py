import os
from pathlib import Path

import numpy as np
import pytest

from qkge.data import KnowledgeGraph
from tests.helpers import TOY_TEST, TOY_TRAIN, TOY_VALID, write_dataset


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def toy_kg() -> KnowledgeGraph:
    return KnowledgeGraph.from_strings(TOY_TRAIN, TOY_VALID, TOY_TEST)


@pytest.fixture
def toy_dir(tmp_path) -> Path:
    return write_dataset(tmp_path / "toy", TOY_TRAIN, TOY_VALID, TOY_TEST)


@pytest.fixture(scope="session")
def umls_dir() -> Path:
    path = os.environ.get("QKGE_UMLS_DIR")
    if not path or not Path(path).is_dir():
        pytest.skip("set QKGE_UMLS_DIR to the UMLS split directory")
    return Path(path)
