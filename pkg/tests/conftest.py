import pytest

from rulebooks.cli import data_path
from rulebooks.dsl import load_rulebook
from rulebooks.scenario import load_scenario


@pytest.fixture(scope="session")
def avoidance():
    return load_scenario(data_path("avoidance.json"))


def shipped_rulebook(name, scenario=None):
    return load_rulebook(data_path(name), scenario.params if scenario else None)
