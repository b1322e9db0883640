"""Command line front end.

Exit codes: 0 success, 1 usage error, 2 input/validation error,
3 self-check found a counterexample.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from concurrent.futures import ThreadPoolExecutor

from .compact import CompactIndex, Strategy
from .dataset import DatasetError, generate_sets, load_sets, save_sets
from .matching import (
    SizeMismatchError,
    brute_force_bottleneck,
    exact_bottleneck,
)
from .multisnap import BudgetExceededError, MultiSnapIndex
from .pairwise import approx_bottleneck
from .storage import StorageError, load_index, save_index
from .validate import (
    SUITES,
    dump_counterexample,
    format_report,
    replay_counterexample,
    run_suites,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_COUNTEREXAMPLE = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; this tool reserves 2 for bad
    # input data, so remap.
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> _Parser:
    parser = _Parser(prog="bottletrie", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[], help="generate a random JSONL dataset")
    p.add_argument("output")
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--nmin", type=int, default=2)
    p.add_argument("--nmax", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("build", help="build an index from a JSONL dataset")
    p.add_argument("dataset")
    p.add_argument("output")
    p.add_argument("--index", choices=["compact", "multisnap"], default="compact")
    p.add_argument("--dmax", type=int, default=12)
    p.add_argument("--budget", type=int, default=1_000_000,
                   help="multisnap enumeration budget")

    p = sub.add_parser("query", help="query an index with JSONL point sets")
    p.add_argument("index")
    p.add_argument("queries")
    p.add_argument("--mode", choices=["nearest", "subset", "superset"],
                   default="nearest")
    p.add_argument("--strategy", choices=["per-node", "leaf-only", "auto"],
                   default="auto")
    p.add_argument("--rescore", action="store_true",
                   help="re-rank equal-size hits by exact bottleneck distance")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("dist", help="exact bottleneck distance between two sets")
    p.add_argument("dataset")
    p.add_argument("id_a")
    p.add_argument("id_b")
    p.add_argument("--oracle", choices=["exact", "brute"], default="exact")

    p = sub.add_parser("dist-approx",
                       help="approximate bottleneck distance between two sets")
    p.add_argument("dataset")
    p.add_argument("id_a")
    p.add_argument("id_b")
    p.add_argument("--dmax", type=int, default=20)

    p = sub.add_parser("validate", help="randomized self-checks")
    p.add_argument("--suite", choices=["all", *SUITES], default="all")
    p.add_argument("--trials", type=int, default=25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dmax", type=int, default=10)
    p.add_argument("--dump", default="counterexample.json",
                   help="where to write a found counterexample")
    p.add_argument("--replay", help="re-check a dumped counterexample file")

    p = sub.add_parser("stats", help="index statistics")
    p.add_argument("index")

    return parser


def _cmd_gen(args: argparse.Namespace) -> int:
    rng = random.Random(args.seed)
    try:
        sets = generate_sets(args.count, args.nmin, args.nmax, rng)
    except DatasetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    save_sets(args.output, sets)
    print(f"wrote {len(sets)} point sets to {args.output}")
    return EXIT_OK


def _cmd_build(args: argparse.Namespace) -> int:
    try:
        sets = load_sets(args.dataset)
    except (OSError, DatasetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.index == "multisnap":
        index: CompactIndex | MultiSnapIndex = MultiSnapIndex(
            d_max=args.dmax, budget=args.budget
        )
    else:
        index = CompactIndex(d_max=args.dmax)
    try:
        for ps in sets:
            index.insert(ps)
    except (BudgetExceededError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    save_index(args.output, index)
    print(
        f"indexed {len(sets)} sets ({args.index}, d_max={args.dmax}, "
        f"{index.node_count()} trie nodes) -> {args.output}"
    )
    return EXIT_OK


def _cmd_query(args: argparse.Namespace) -> int:
    try:
        index = load_index(args.index)
        queries = load_sets(args.queries)
    except (OSError, DatasetError, StorageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.mode != "nearest" and not isinstance(index, CompactIndex):
        print("error: subset/superset queries need a compact index",
              file=sys.stderr)
        return EXIT_INPUT

    def run_one(Q):
        if isinstance(index, MultiSnapIndex):
            res = index.query_nearest(Q)
        else:
            strategy = Strategy(args.strategy)
            fn = {
                "nearest": index.query_nearest,
                "subset": index.query_subset,
                "superset": index.query_superset,
            }[args.mode]
            res = fn(Q, strategy=strategy)
        record = {
            "query": Q.id,
            "ids": list(res.ids),
            "level": res.level,
            "bound": None if res.empty else res.bound,
        }
        if args.rescore and not res.empty:
            scored = sorted(
                (exact_bottleneck(index.registry[sid], Q), sid)
                for sid in res.ids
                if len(index.registry[sid]) == len(Q)
            )
            record["rescored"] = [
                {"id": sid, "distance": dist} for dist, sid in scored
            ]
        return record

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            records = list(pool.map(run_one, queries))
    else:
        records = [run_one(Q) for Q in queries]
    for record in records:
        print(json.dumps(record))
    return EXIT_OK


def _lookup_pair(args: argparse.Namespace):
    sets = {ps.id: ps for ps in load_sets(args.dataset)}
    missing = [sid for sid in (args.id_a, args.id_b) if sid not in sets]
    if missing:
        raise DatasetError(f"unknown set id(s): {', '.join(missing)}")
    return sets[args.id_a], sets[args.id_b]


def _cmd_dist(args: argparse.Namespace) -> int:
    try:
        P, Q = _lookup_pair(args)
        oracle = exact_bottleneck if args.oracle == "exact" else brute_force_bottleneck
        value = oracle(P, Q)
    except (OSError, DatasetError, SizeMismatchError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(json.dumps({"id_a": args.id_a, "id_b": args.id_b, "distance": value}))
    return EXIT_OK


def _cmd_dist_approx(args: argparse.Namespace) -> int:
    try:
        P, Q = _lookup_pair(args)
        res = approx_bottleneck(P, Q, d_max=args.dmax)
    except (OSError, DatasetError, SizeMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(json.dumps({
        "id_a": args.id_a,
        "id_b": args.id_b,
        "estimate": res.estimate,
        "lower": res.lower,
        "upper": res.upper,
        "level": res.d_star,
        "at_resolution_floor": res.at_resolution_floor,
    }))
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    if args.replay:
        try:
            report = replay_counterexample(args.replay, d_max=args.dmax)
        except (OSError, ValueError, KeyError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INPUT
        print(format_report([report]))
        return EXIT_OK if report.ok else EXIT_COUNTEREXAMPLE
    names = list(SUITES) if args.suite == "all" else [args.suite]
    if args.trials < 0:
        print("error: --trials must be >= 0", file=sys.stderr)
        return EXIT_USAGE
    reports = run_suites(names, args.trials, args.seed, d_max=args.dmax)
    print(format_report(reports))
    failed = [r for r in reports if not r.ok]
    if failed:
        dump_counterexample(args.dump, failed[0].counterexample)
        print(f"counterexample written to {args.dump}", file=sys.stderr)
        return EXIT_COUNTEREXAMPLE
    return EXIT_OK


def _cmd_stats(args: argparse.Namespace) -> int:
    try:
        index = load_index(args.index)
    except (OSError, StorageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    kind = "multisnap" if isinstance(index, MultiSnapIndex) else "compact"
    print(json.dumps({
        "kind": kind,
        "d_max": index.d_max,
        "sets": len(index.registry),
        "cardinalities": sorted(index.tries),
        "trie_nodes": index.node_count(),
    }, indent=2))
    return EXIT_OK


_COMMANDS = {
    "gen": _cmd_gen,
    "build": _cmd_build,
    "query": _cmd_query,
    "dist": _cmd_dist,
    "dist-approx": _cmd_dist_approx,
    "validate": _cmd_validate,
    "stats": _cmd_stats,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return _COMMANDS[args.command](args)


if __name__ == "__main__":
    raise SystemExit(main())
