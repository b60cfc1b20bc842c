"""YAML run configuration.

Every key is optional; omitted keys take the defaults shown in
``configs/default.yaml``. Unknown and duplicate keys are errors.
"""

from dataclasses import dataclass, field, replace

import numpy as np
import yaml

from .collab import Policy, StopRule
from .design import MapGrid, PredictionMode
from .exceptions import ConfigError, JointInquiryError
from .inference import StateGrid
from .world import CircleState, FieldBounds, SensorModel

__all__ = ["RunConfig", "parse_config", "load_config"]


@dataclass(frozen=True, eq=False)
class RunConfig:
    bounds: FieldBounds
    state_grid: StateGrid
    map_grid: MapGrid
    sensor: SensorModel
    policy: Policy
    stop: StopRule
    mode: PredictionMode
    seed: int = 0
    truth: object = "random"
    observations: tuple = field(default=())

    def with_seed(self, seed):
        return replace(self, seed=int(seed))

    def with_policy(self, policy):
        return replace(self, policy=policy if isinstance(policy, Policy) else Policy(policy))


class _UniqueKeyLoader(yaml.SafeLoader):
    pass


def _construct_mapping(loader, node, deep=False):
    seen = {}
    for key_node, _ in node.value:
        key = loader.construct_object(key_node, deep=deep)
        if key in seen:
            raise ConfigError(
                f"duplicate key {key!r} at line {key_node.start_mark.line + 1} "
                f"(first defined at line {seen[key] + 1})"
            )
        seen[key] = key_node.start_mark.line
    return loader.construct_mapping(node, deep=deep)


_UniqueKeyLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)


class _Section:
    """Pops keys from one mapping and rejects leftovers."""

    def __init__(self, data, path):
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError(f"{path or 'document'}: expected a mapping")
        self.data = dict(data)
        self.path = path

    def name(self, key):
        return f"{self.path}.{key}" if self.path else key

    def get(self, key, default, conv=None):
        value = self.data.pop(key, default)
        if conv is None or value is default:
            return value
        try:
            return conv(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{self.name(key)}: {exc}") from exc

    def sub(self, key):
        return _Section(self.data.pop(key, None), self.name(key))

    def done(self):
        if self.data:
            keys = ", ".join(self.name(k) for k in sorted(map(str, self.data)))
            raise ConfigError(f"unknown key(s): {keys}")


def _axis(section, default):
    """An axis is ``{start, stop, num}`` or ``{values: [...]}``."""
    values = section.get("values", None)
    if values is not None:
        section.done()
        return np.asarray(values, dtype=float)
    start = section.get("start", default[0], float)
    stop = section.get("stop", default[1], float)
    num = section.get("num", default[2], int)
    section.done()
    if num < 1:
        raise ConfigError(f"{section.path}.num must be >= 1")
    return np.linspace(start, stop, num)


def _build(label, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except JointInquiryError as exc:
        raise ConfigError(f"{label}: {exc}") from exc


def parse_config(text):
    """Parse and validate a YAML configuration document."""
    try:
        data = yaml.load(text, Loader=_UniqueKeyLoader)
    except ConfigError:
        raise
    except yaml.YAMLError as exc:
        raise ConfigError(f"YAML parse error: {exc}") from exc
    root = _Section(data, "")

    f = root.sub("field")
    bounds = _build(
        "field", FieldBounds,
        f.get("xmin", 0.0, float), f.get("xmax", 100.0, float),
        f.get("ymin", 0.0, float), f.get("ymax", 100.0, float),
    )
    f.done()

    sg = root.sub("state_grid")
    xs = _axis(sg.sub("x"), (bounds.xmin, bounds.xmax, 50))
    ys = _axis(sg.sub("y"), (bounds.ymin, bounds.ymax, 50))
    rs = _axis(sg.sub("r"), (3.0, 12.0, 10))
    sg.done()
    state_grid = _build("state_grid", StateGrid, xs, ys, rs)
    _build("state_grid", state_grid.check_bounds, bounds)

    mg = root.sub("map_grid")
    mx = _axis(mg.sub("x"), (bounds.xmin, bounds.xmax, 50))
    my = _axis(mg.sub("y"), (bounds.ymin, bounds.ymax, 50))
    mg.done()
    map_grid = _build("map_grid", MapGrid, mx, my)
    _build("map_grid", map_grid.check_bounds, bounds)

    s = root.sub("sensor")
    kind = s.get("kind", "ideal", str)
    sensor = _build(
        "sensor", SensorModel, kind,
        s.get("noise", 0.02 if kind == "ideal" else 0.05, float),
        s.get("footprint_radius", 1.0, float),
        s.get("bins", 16, int),
    )
    s.done()

    p = root.sub("policy")
    policy = _build("policy", Policy, p.get("kind", "sequential-greedy", str), p.get("restarts", 20, int))
    p.done()

    st = root.sub("stop")
    stop = _build(
        "stop", StopRule, st.get("max_rounds", 25, int), st.get("entropy_threshold", 0.1, float)
    )
    st.done()

    m = root.sub("mode")
    mode = _build("mode", PredictionMode, m.get("kind", "exact", str), m.get("n_samples", 45, int))
    m.done()

    seed = root.get("seed", 0, int)
    if seed < 0:
        raise ConfigError("seed must be non-negative")

    truth_raw = root.get("truth", "random")
    if truth_raw == "random":
        truth = "random"
    else:
        t = _Section(truth_raw, "truth")
        truth = _build("truth", CircleState, t.get("x", None, float), t.get("y", None, float), t.get("r", None, float))
        t.done()
        _build("truth", truth.check_bounds, bounds)

    obs_raw = root.get("observations", [])
    if not isinstance(obs_raw, list):
        raise ConfigError("observations: expected a list")
    observations = []
    for k, item in enumerate(obs_raw):
        o = _Section(item, f"observations[{k}]")
        x, y, v = o.get("x", None, float), o.get("y", None, float), o.get("value", None, float)
        o.done()
        if x is None or y is None or v is None or not 0.0 <= v <= 1.0:
            raise ConfigError(f"observations[{k}]: needs x, y and value in [0, 1]")
        observations.append((x, y, v))

    root.done()
    return RunConfig(bounds, state_grid, map_grid, sensor, policy, stop, mode, seed, truth, tuple(observations))


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
