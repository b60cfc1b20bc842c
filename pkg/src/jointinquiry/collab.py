"""Two-agent measurement episodes on a shared posterior.

Seeding
-------
All randomness derives from one master seed through
``numpy.random.SeedSequence(master, spawn_key=key)``:

* ``(0,)`` draws the ground-truth circle when the truth is ``"random"``;
* ``(1, r, 0)`` seeds pair selection in round ``r`` (hill-climb restarts
  and sampled-mode draws);
* ``(1, r, 1)`` and ``(1, r, 2)`` seed the sensor noise of agent 1 and
  agent 2 in round ``r``.

Rounds are numbered from 1.
"""

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .design import (
    POLICIES,
    hill_climb_pair_search,
    prediction_table,
    select_independent,
    select_joint_exhaustive,
    select_sequential_greedy,
    with_seed,
    _entropy_bits,
)
from .exceptions import ContradictionError, ValidationError
from .inference import bayes_update, init_prior, map_estimate, posterior_entropy
from .world import MeasurementLocation, simulate_measurement

__all__ = [
    "Policy",
    "StopRule",
    "RoundRecord",
    "EpisodeLog",
    "child_seed",
    "select_pair",
    "run_round",
    "run_episode",
    "compare_policies",
    "summary_to_csv",
]


@dataclass(frozen=True)
class Policy:
    kind: str = "sequential-greedy"
    restarts: int = 20

    def __post_init__(self):
        if self.kind not in POLICIES:
            raise ValidationError(f"unknown policy {self.kind!r}; expected one of {POLICIES}")
        if self.kind == "joint-search" and int(self.restarts) < 1:
            raise ValidationError("joint-search policy needs restarts >= 1")


@dataclass(frozen=True)
class StopRule:
    max_rounds: int = 25
    entropy_threshold: float = 0.1

    def __post_init__(self):
        if int(self.max_rounds) < 1:
            raise ValidationError("max_rounds must be >= 1")
        if not self.entropy_threshold >= 0:
            raise ValidationError("entropy_threshold must be >= 0")


def child_seed(master, *key):
    return np.random.SeedSequence(int(master), spawn_key=tuple(int(k) for k in key))


def _as_seedseq(seed):
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def _child(ss, k):
    return np.random.SeedSequence(ss.entropy, spawn_key=tuple(ss.spawn_key) + (k,))


@dataclass
class RoundRecord:
    """One round of an episode. Field order is the JSON-lines key order."""

    round: int
    e1: tuple
    e2: tuple
    obs1: float
    obs2: float
    h1: float
    h2: float
    joint_entropy: float
    mutual_information: float
    posterior_entropy: float
    map_estimate: tuple
    center_error: float
    radius_error: float

    def to_json(self):
        return json.dumps(asdict(self), separators=(",", ":"))


@dataclass
class EpisodeLog:
    truth: object
    policy: Policy
    records: list = field(default_factory=list)
    final_posterior: object = None
    initial_entropy: float = 0.0
    converged: bool = False

    @property
    def rounds(self):
        return len(self.records)

    def rounds_to_threshold(self, threshold):
        """First round whose posterior entropy is at or below ``threshold``, else ``None``."""
        for rec in self.records:
            if rec.posterior_entropy <= threshold:
                return rec.round
        return None

    def to_jsonl(self):
        return "".join(rec.to_json() + "\n" for rec in self.records)


def select_pair(posterior, sensor, policy, map_grid, mode, seed=0):
    """Dispatch to the selection routine named by ``policy.kind``."""
    mode = with_seed(mode, seed)
    if policy.kind == "independent":
        return select_independent(posterior, sensor, map_grid, mode)
    if policy.kind == "sequential-greedy":
        return select_sequential_greedy(posterior, sensor, map_grid, mode)
    if policy.kind == "joint-exhaustive":
        return select_joint_exhaustive(posterior, sensor, map_grid, mode)
    return hill_climb_pair_search(posterior, sensor, map_grid, mode, policy.restarts, seed)


def _pair_entropies(posterior, e1, e2, sensor, mode):
    t = prediction_table(posterior, [[e1.x, e1.y], [e2.x, e2.y]], sensor, mode)
    h1 = float(_entropy_bits(t.marginal(0)))
    h2 = float(_entropy_bits(t.marginal(1)))
    h12 = float(_entropy_bits(t.joint(0, 1)))
    return h1, h2, h12, max(h1 + h2 - h12, 0.0)


def run_round(posterior, truth, sensor, policy, map_grid, mode, seed, round_index=1):
    """Select a pair, measure at both locations, then update agent 1 before agent 2.

    ``seed`` is the round's SeedSequence (or anything SeedSequence accepts);
    its children 0, 1, 2 drive selection, agent-1 noise and agent-2 noise.
    """
    ss = _as_seedseq(seed)
    sel_seed = int(_child(ss, 0).generate_state(1)[0])
    round_mode = with_seed(mode, sel_seed)
    e1, e2 = select_pair(posterior, sensor, policy, map_grid, round_mode, sel_seed)
    h1, h2, h12, mi = _pair_entropies(posterior, e1, e2, sensor, round_mode)
    obs1 = simulate_measurement(truth, e1, sensor, np.random.default_rng(_child(ss, 1)))
    obs2 = simulate_measurement(truth, e2, sensor, np.random.default_rng(_child(ss, 2)))
    try:
        post = bayes_update(posterior, e1, obs1, sensor)
        post = bayes_update(post, e2, obs2, sensor)
    except ContradictionError as exc:
        exc.round_index = round_index
        raise
    est = map_estimate(post)
    record = RoundRecord(
        round=int(round_index),
        e1=(e1.x, e1.y),
        e2=(e2.x, e2.y),
        obs1=float(obs1),
        obs2=float(obs2),
        h1=h1,
        h2=h2,
        joint_entropy=h12,
        mutual_information=mi,
        posterior_entropy=posterior_entropy(post),
        map_estimate=(est.x, est.y, est.r),
        center_error=float(math.hypot(est.x - truth.x, est.y - truth.y)),
        radius_error=float(abs(est.r - truth.r)),
    )
    return post, record


def initial_posterior(config):
    """Uniform prior conditioned on any preset observations in ``config``."""
    post = init_prior(config.state_grid)
    for x, y, value in config.observations:
        post = bayes_update(post, MeasurementLocation(x, y), value, config.sensor)
    return post


def resolve_truth(config):
    if config.truth != "random":
        return config.truth
    rng = np.random.default_rng(child_seed(config.seed, 0))
    return config.state_grid.state(int(rng.integers(config.state_grid.size)))


def run_episode(config, policy=None):
    """Run rounds until the posterior entropy reaches the threshold or the round budget ends."""
    policy = policy or config.policy
    truth = resolve_truth(config)
    post = initial_posterior(config)
    log = EpisodeLog(truth=truth, policy=policy, initial_entropy=posterior_entropy(post))
    stop = config.stop
    if log.initial_entropy <= stop.entropy_threshold:
        log.converged = True
        log.final_posterior = post
        return log
    for r in range(1, int(stop.max_rounds) + 1):
        post, rec = run_round(
            post, truth, config.sensor, policy, config.map_grid, config.mode,
            child_seed(config.seed, 1, r), round_index=r,
        )
        log.records.append(rec)
        if rec.posterior_entropy <= stop.entropy_threshold:
            log.converged = True
            break
    log.final_posterior = post
    return log


SUMMARY_FIELDS = (
    "policy",
    "n_seeds",
    "converged_fraction",
    "mean_rounds_to_threshold",
    "mean_pair_mi",
    "mean_pair_joint_entropy",
)


def compare_policies(config, seeds, policies=None):
    """Run one episode per (policy, seed) and summarise each policy.

    Episodes that never reach the threshold count ``max_rounds`` rounds.
    Per-round means average over every round of every episode.

    Returns ``(summary_rows, logs)`` where ``logs[policy_kind]`` lists the
    episode logs in seed order.
    """
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise ValidationError("compare_policies needs at least one seed")
    if policies is None:
        policies = [config.policy]
    policies = [p if isinstance(p, Policy) else Policy(p) for p in policies]
    rows, logs = [], {}
    for policy in policies:
        episodes = [run_episode(config.with_seed(s), policy) for s in seeds]
        logs[policy.kind] = episodes
        rounds = []
        for ep in episodes:
            r = ep.rounds_to_threshold(config.stop.entropy_threshold)
            if r is None:
                r = 0 if ep.converged else int(config.stop.max_rounds)
            rounds.append(r)
        mi = [rec.mutual_information for ep in episodes for rec in ep.records]
        jh = [rec.joint_entropy for ep in episodes for rec in ep.records]
        rows.append({
            "policy": policy.kind,
            "n_seeds": len(seeds),
            "converged_fraction": float(np.mean([ep.converged for ep in episodes])),
            "mean_rounds_to_threshold": float(np.mean(rounds)),
            "mean_pair_mi": float(np.mean(mi)) if mi else 0.0,
            "mean_pair_joint_entropy": float(np.mean(jh)) if jh else 0.0,
        })
    return rows, logs


def summary_to_csv(rows, fh=None):
    sink = io.StringIO() if fh is None else fh
    writer = csv.DictWriter(sink, fieldnames=SUMMARY_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return sink.getvalue() if fh is None else None
