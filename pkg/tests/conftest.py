from __future__ import annotations

from pathlib import Path

import pytest

from edgesuggest.graph import load_data_graph
from edgesuggest.log import load_log

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def film_graph():
    return load_data_graph(str(DATA / "film_nodes.tsv"), str(DATA / "film_edges.tsv"))


@pytest.fixture(scope="session")
def worked_log():
    return load_log(str(DATA / "worked_sessions.log"))


@pytest.fixture(scope="session")
def film_train_log():
    return load_log(str(DATA / "film_train.log"))


@pytest.fixture(scope="session")
def data_dir():
    return DATA
