"""Command-line front end: ``jointinquiry {run,map,compare}``."""

import argparse
import os
import sys
import tempfile
from pathlib import Path

from .collab import Policy, compare_policies, initial_posterior, run_episode, summary_to_csv
from .config import load_config, parse_config
from .design import entropy_map, joint_entropy_map, mutual_information_map, with_seed
from .exceptions import JointInquiryError
from .world import MeasurementLocation

RUN_LOG = "episode.jsonl"
RUN_POSTERIOR = "posterior.csv"
COMPARE_SUMMARY = "compare.csv"


def atomic_write(path, data):
    """Write ``data`` (str or bytes) next to ``path`` and rename into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    binary = isinstance(data, bytes)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb" if binary else "w", **({} if binary else {"encoding": "utf-8", "newline": ""})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load(args):
    config = load_config(args.config) if args.config else parse_config("")
    if args.seed is not None:
        config = config.with_seed(args.seed)
    if getattr(args, "policy", None) and args.command != "compare":
        config = config.with_policy(args.policy)
    return config


def cmd_run(args):
    config = _load(args)
    log = run_episode(config)
    out = Path(args.out)
    atomic_write(out / RUN_LOG, log.to_jsonl())
    atomic_write(out / RUN_POSTERIOR, log.final_posterior.to_csv())
    status = "converged" if log.converged else "stopped"
    print(f"{status} after {log.rounds} rounds; truth={log.truth}", file=sys.stderr)
    return 0


def _parse_xy(text):
    try:
        x, y = (float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected X,Y but got {text!r}") from None
    return MeasurementLocation(x, y)


def cmd_map(args):
    config = _load(args)
    posterior = initial_posterior(config)
    mode = with_seed(config.mode, config.seed)
    out = Path(args.out)
    maps = {"entropy_map": entropy_map(posterior, config.sensor, config.map_grid, mode)}
    if args.e1 is not None:
        e1 = args.e1.check_bounds(config.bounds)
        maps["joint_entropy_map"] = joint_entropy_map(posterior, config.sensor, e1, config.map_grid, mode)
        maps["mutual_information_map"] = mutual_information_map(posterior, config.sensor, e1, config.map_grid, mode)
    for name, emap in maps.items():
        atomic_write(out / f"{name}.csv", emap.to_csv())
        atomic_write(out / f"{name}.pgm", emap.to_pgm())
    return 0


def _parse_seeds(text):
    seeds = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo, hi = part.split("-", 1)
            seeds.extend(range(int(lo), int(hi) + 1))
        else:
            seeds.append(int(part))
    return seeds


def cmd_compare(args):
    config = _load(args)
    try:
        seeds = _parse_seeds(args.seeds)
    except ValueError:
        seeds = None
    if not seeds:
        print("error: --seeds must list at least one seed (e.g. 0-9 or 1,2,5)", file=sys.stderr)
        return 2
    if args.policy:
        policies = [Policy(p.strip(), config.policy.restarts) for p in args.policy.split(",") if p.strip()]
    else:
        policies = [config.policy]
    rows, _ = compare_policies(config, seeds, policies)
    atomic_write(Path(args.out) / COMPARE_SUMMARY, summary_to_csv(rows))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="jointinquiry", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="YAML configuration file (defaults when omitted)")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, help="master seed, overrides the config")

    p = sub.add_parser("run", help="run one two-agent episode")
    common(p)
    p.add_argument("--policy", help="selection policy, overrides the config")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("map", help="write entropy maps for the configured posterior")
    common(p)
    p.add_argument("--e1", type=_parse_xy, help="fixed first location X,Y for joint/MI maps")
    p.add_argument("--policy", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("compare", help="compare policies over several seeds")
    common(p)
    p.add_argument("--seeds", required=True, help="seed list, e.g. 0-99 or 1,4,7")
    p.add_argument("--policy", help="comma-separated policies (default: the config's policy)")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (JointInquiryError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
