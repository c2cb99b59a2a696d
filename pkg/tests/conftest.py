import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from jsonschema import Draft202012Validator
from referencing import Registry, Resource

from geodiam.involution import central_symmetry
from geodiam.surface import build_box, build_symmetric_hull

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("geodiam", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("geodiam")


@pytest.fixture(scope="session")
def cube():
    return build_box(1, 1, 1)


@pytest.fixture(scope="session")
def cube_inv(cube):
    return central_symmetry(cube)


@pytest.fixture(scope="session")
def hull7():
    return build_symmetric_hull(50, seed=7)


@pytest.fixture(scope="session")
def octahedron():
    return build_symmetric_hull(points=np.eye(3))


def _schemas():
    out = {}
    for f in resources.files("geodiam.schemas").iterdir():
        if f.name.endswith(".json"):
            out[f.name] = json.loads(f.read_text())
    return out


SCHEMAS = _schemas()
REGISTRY = Registry().with_resources(
    (name, Resource.from_contents(doc)) for name, doc in SCHEMAS.items())


@pytest.fixture(scope="session")
def check_schema():
    """Validate a decoded JSON document against one of the shipped schemas."""
    def check(name, doc):
        Draft202012Validator(SCHEMAS[name + ".json"], registry=REGISTRY).validate(doc)
        return doc
    return check


ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def acceptance_log(pytestconfig):
    """Lines summarising each acceptance criterion, echoed after the run."""
    return pytestconfig.stash.setdefault(ACCEPTANCE, [])


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda t: int(t.split()[1])):
            terminalreporter.write_line(line)
