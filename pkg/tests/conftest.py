import pytest

from graphabac import AccessQuery, LoadedModel, load_bundled_model
from graphabac.dsl import bundled_model_text


@pytest.fixture(scope="session")
def healthcare_text() -> str:
    return bundled_model_text()


@pytest.fixture(scope="session")
def healthcare() -> LoadedModel:
    return load_bundled_model()


@pytest.fixture(scope="session")
def query(healthcare):
    def make(subject: str, action: str, obj: str) -> AccessQuery:
        g = healthcare.graph
        return AccessQuery(
            sub=g.find_node(subject), act=g.find_node(action), obj=g.find_node(obj)
        )

    return make
