import pytest

from src.CPTreeIndex import build_index
from src.ProfiledGraph import load_fixture


@pytest.fixture(scope="session")
def fixture_graph():
    return load_fixture()


@pytest.fixture(scope="session")
def fixture_index(fixture_graph):
    return build_index(fixture_graph)
