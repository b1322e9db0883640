"""Randomized self-checks: index guarantees against the exact oracles.

Each suite runs seeded random trials and checks a hard invariant
(soundness window, approximation factor, oracle agreement, strategy
equivalence).  The first violated invariant is captured as a JSON
counterexample that can be replayed verbatim.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .compact import CompactIndex, Strategy
from .dataset import generate_sets, parse_record, perturb
from .geometry import PointSet, delta
from .matching import brute_force_bottleneck, exact_bottleneck
from .multisnap import MultiSnapIndex
from .pairwise import approx_bottleneck


@dataclass
class Counterexample:
    suite: str
    trial: int
    seed: int
    detail: dict
    sets: list[PointSet] = field(default_factory=list)
    query: PointSet | None = None

    def to_json(self) -> dict:
        out = {
            "suite": self.suite,
            "trial": self.trial,
            "seed": self.seed,
            "detail": self.detail,
            "sets": [
                {"id": ps.id, "points": [[p.x, p.y] for p in ps.points]}
                for ps in self.sets
            ],
        }
        if self.query is not None:
            out["query"] = {
                "id": self.query.id,
                "points": [[p.x, p.y] for p in self.query.points],
            }
        return out


@dataclass
class SuiteReport:
    name: str
    trials: int
    counterexample: Counterexample | None = None

    @property
    def ok(self) -> bool:
        return self.counterexample is None


def _bottleneck_min(db: list[PointSet], Q: PointSet) -> float:
    return min(
        exact_bottleneck(ps, Q) for ps in db if len(ps) == len(Q)
    )


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------


def suite_oracle(rng: random.Random, trial: int, d_max: int
                 ) -> Counterexample | None:
    n = rng.randint(1, 6)
    P = generate_sets(1, n, n, rng, prefix=f"ora-{trial}-p")[0]
    Q = generate_sets(1, n, n, rng, prefix=f"ora-{trial}-q")[0]
    fast = exact_bottleneck(P, Q)
    slow = brute_force_bottleneck(P, Q)
    if abs(fast - slow) > 1e-12:
        return Counterexample(
            "oracle", trial, 0,
            {"exact": fast, "brute_force": slow},
            sets=[P], query=Q,
        )
    return None


def suite_compact(rng: random.Random, trial: int, d_max: int
                  ) -> Counterexample | None:
    m = rng.randint(2, 6)
    n = rng.randint(1, 5)
    db = generate_sets(m, n, n, rng, prefix=f"cmp-{trial}")
    index = CompactIndex(d_max=d_max)
    for ps in db:
        index.insert(ps)
    Q = perturb(rng.choice(db), rng.uniform(0.0, 0.3), rng, new_id="query")
    res = index.query_nearest(Q)
    if res.empty:
        return Counterexample(
            "compact", trial, 0, {"reason": "no hit at level 1"}, db, Q
        )
    by_id = {ps.id: ps for ps in db}
    for sid in res.ids:
        d_b = exact_bottleneck(by_id[sid], Q)
        if d_b > res.bound + 1e-12:
            return Counterexample(
                "compact", trial, 0,
                {"reason": "soundness", "id": sid, "d_b": d_b,
                 "bound": res.bound, "level": res.level},
                db, Q,
            )
    best = _bottleneck_min(db, Q)
    if res.level < d_max and best > 0 and res.bound > 16.0 * best + 1e-12:
        return Counterexample(
            "compact", trial, 0,
            {"reason": "approximation", "best": best,
             "bound": res.bound, "level": res.level},
            db, Q,
        )
    return None


def suite_multisnap(rng: random.Random, trial: int, d_max: int
                    ) -> Counterexample | None:
    m = rng.randint(2, 5)
    n = rng.randint(1, 4)
    db = generate_sets(m, n, n, rng, prefix=f"ms-{trial}")
    index = MultiSnapIndex(d_max=d_max)
    for ps in db:
        index.insert(ps)
    # a stored set queried verbatim must be found at full depth
    probe = rng.choice(db)
    self_res = index.query_nearest(PointSet("self", probe.points))
    if probe.id not in self_res.ids or self_res.level != d_max:
        return Counterexample(
            "multisnap", trial, 0,
            {"reason": "self lookup", "ids": list(self_res.ids),
             "level": self_res.level},
            db, probe,
        )
    Q = perturb(probe, rng.uniform(0.0, 0.3), rng, new_id="query")
    res = index.query_nearest(Q)
    if res.empty:
        return None  # miss is allowed; only hits carry guarantees
    by_id = {ps.id: ps for ps in db}
    for sid in res.ids:
        d_b = exact_bottleneck(by_id[sid], Q)
        if d_b > res.bound + 1e-12:
            return Counterexample(
                "multisnap", trial, 0,
                {"reason": "soundness", "id": sid, "d_b": d_b,
                 "bound": res.bound, "level": res.level},
                db, Q,
            )
    best = _bottleneck_min(db, Q)
    if res.level < d_max and best > 0 and res.bound > 12.0 * best + 1e-12:
        return Counterexample(
            "multisnap", trial, 0,
            {"reason": "approximation", "best": best,
             "bound": res.bound, "level": res.level},
            db, Q,
        )
    return None


def suite_strategies(rng: random.Random, trial: int, d_max: int
                     ) -> Counterexample | None:
    m = rng.randint(2, 5)
    n = rng.randint(1, 4)
    db = generate_sets(m, n, n, rng, prefix=f"str-{trial}")
    index = CompactIndex(d_max=d_max)
    for ps in db:
        index.insert(ps)
    Q = perturb(rng.choice(db), rng.uniform(0.0, 0.2), rng, new_id="query")
    for query in (index.query_nearest, index.query_subset, index.query_superset):
        a = query(Q, strategy=Strategy.PER_NODE)
        b = query(Q, strategy=Strategy.LEAF_ONLY)
        if a.ids != b.ids or a.level != b.level:
            return Counterexample(
                "strategies", trial, 0,
                {"reason": query.__name__,
                 "per_node": {"ids": list(a.ids), "level": a.level},
                 "leaf_only": {"ids": list(b.ids), "level": b.level}},
                db, Q,
            )
    return None


def suite_pairwise(rng: random.Random, trial: int, d_max: int
                   ) -> Counterexample | None:
    n = rng.randint(1, 5)
    P = generate_sets(1, n, n, rng, prefix=f"pw-{trial}")[0]
    Q = perturb(P, rng.uniform(0.0, 0.4), rng, new_id="query")
    exact = exact_bottleneck(P, Q)
    approx = approx_bottleneck(P, Q, d_max=d_max)
    if exact > approx.upper + 1e-12:
        return Counterexample(
            "pairwise", trial, 0,
            {"reason": "upper", "exact": exact, "upper": approx.upper,
             "d_star": approx.d_star},
            [P], Q,
        )
    if not approx.at_resolution_floor and exact < approx.lower - 1e-12:
        return Counterexample(
            "pairwise", trial, 0,
            {"reason": "lower", "exact": exact, "lower": approx.lower,
             "d_star": approx.d_star},
            [P], Q,
        )
    return None


SUITES: dict[str, Callable[[random.Random, int, int], Counterexample | None]] = {
    "oracle": suite_oracle,
    "compact": suite_compact,
    "multisnap": suite_multisnap,
    "strategies": suite_strategies,
    "pairwise": suite_pairwise,
}


def run_suites(
    names: list[str],
    trials: int,
    seed: int,
    d_max: int = 10,
) -> list[SuiteReport]:
    reports = []
    for name in names:
        fn = SUITES[name]
        report = SuiteReport(name, trials)
        # string seeding is deterministic across processes (unlike hash())
        rng = random.Random(f"{seed}:{name}")
        for t in range(trials):
            ce = fn(rng, t, d_max)
            if ce is not None:
                ce.seed = seed
                report.counterexample = ce
                break
        reports.append(report)
    return reports


def dump_counterexample(path: str | Path, ce: Counterexample) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(ce.to_json(), fh, indent=2)
        fh.write("\n")


def replay_counterexample(path: str | Path, d_max: int = 10) -> SuiteReport:
    """Re-run the checked invariant on a dumped counterexample's data."""
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    suite = obj["suite"]
    sets = [parse_record(rec) for rec in obj["sets"]]
    query = parse_record(obj["query"]) if "query" in obj else None
    report = SuiteReport(suite, 1)
    failure = _replay_invariant(suite, sets, query, d_max)
    if failure is not None:
        report.counterexample = Counterexample(
            suite, 0, obj.get("seed", 0), failure, sets, query
        )
    return report


def _replay_invariant(
    suite: str, sets: list[PointSet], query: PointSet | None, d_max: int
) -> dict | None:
    if suite == "oracle":
        fast = exact_bottleneck(sets[0], query)
        slow = brute_force_bottleneck(sets[0], query)
        if abs(fast - slow) > 1e-12:
            return {"exact": fast, "brute_force": slow}
        return None
    if suite == "pairwise":
        exact = exact_bottleneck(sets[0], query)
        approx = approx_bottleneck(sets[0], query, d_max=d_max)
        if exact > approx.upper + 1e-12:
            return {"reason": "upper", "exact": exact, "upper": approx.upper}
        if not approx.at_resolution_floor and exact < approx.lower - 1e-12:
            return {"reason": "lower", "exact": exact, "lower": approx.lower}
        return None
    if suite in ("compact", "multisnap"):
        index: CompactIndex | MultiSnapIndex
        index = CompactIndex(d_max=d_max) if suite == "compact" else MultiSnapIndex(d_max=d_max)
        for ps in sets:
            index.insert(ps)
        res = index.query_nearest(query)
        if res.empty:
            if suite == "compact":
                return {"reason": "no hit at level 1"}
            return None
        by_id = {ps.id: ps for ps in sets}
        for sid in res.ids:
            d_b = exact_bottleneck(by_id[sid], query)
            if d_b > res.bound + 1e-12:
                return {"reason": "soundness", "id": sid, "d_b": d_b,
                        "bound": res.bound}
        factor = 16.0 if suite == "compact" else 12.0
        best = _bottleneck_min(sets, query)
        if res.level < d_max and best > 0 and res.bound > factor * best + 1e-12:
            return {"reason": "approximation", "best": best, "bound": res.bound}
        return None
    if suite == "strategies":
        index = CompactIndex(d_max=d_max)
        for ps in sets:
            index.insert(ps)
        for fn in (index.query_nearest, index.query_subset, index.query_superset):
            a = fn(query, strategy=Strategy.PER_NODE)
            b = fn(query, strategy=Strategy.LEAF_ONLY)
            if a.ids != b.ids or a.level != b.level:
                return {"reason": fn.__name__}
        return None
    raise ValueError(f"unknown suite {suite!r}")


def format_report(reports: list[SuiteReport]) -> str:
    lines = [f"{'suite':<12} {'trials':>6}  result"]
    for r in reports:
        status = "ok" if r.ok else f"FAIL ({r.counterexample.detail})"
        lines.append(f"{r.name:<12} {r.trials:>6}  {status}")
    return "\n".join(lines)
