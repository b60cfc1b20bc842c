import pytest

from jointinquiry.config import parse_config

SMALL_YAML = """
state_grid:
  x: {start: 10, stop: 90, num: 10}
  y: {start: 10, stop: 90, num: 10}
  r: {start: 15, stop: 35, num: 3}
map_grid:
  x: {start: 0, stop: 100, num: 12}
  y: {start: 0, stop: 100, num: 12}
sensor: {kind: ideal, noise: 0.0}
policy: {kind: joint-exhaustive}
stop: {max_rounds: 25, entropy_threshold: 0.0}
seed: 3
"""


@pytest.fixture
def small_yaml():
    return SMALL_YAML


@pytest.fixture
def small_config():
    return parse_config(SMALL_YAML)
