import pytest
from hypothesis import HealthCheck, settings

from pjkg import golden
from pjkg.ontology import load_default_schema
from pjkg.pipeline import build_pjkg

settings.register_profile("pjkg", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("pjkg")


@pytest.fixture(scope="session")
def schema():
    return load_default_schema()


@pytest.fixture
def golden_outcome(schema):
    return build_pjkg(golden.golden_bundle(), golden.golden_backend(), schema)


@pytest.fixture
def golden_graph(golden_outcome):
    return golden_outcome.pjkg
