"""JSONL datasets of named point sets, plus seeded generators.

One JSON object per line: ``{"id": "...", "points": [[x, y], ...]}``.
Ids must be unique within a file; coordinates must lie in the unit box.
"""

from __future__ import annotations

import json
import random
from pathlib import Path
from typing import Iterable, Sequence

from .geometry import Point, PointSet


class DatasetError(ValueError):
    pass


def parse_record(obj: object, lineno: int | None = None) -> PointSet:
    where = "" if lineno is None else f" (line {lineno})"
    if not isinstance(obj, dict):
        raise DatasetError(f"record is not an object{where}")
    set_id = obj.get("id")
    if not isinstance(set_id, str) or not set_id:
        raise DatasetError(f"missing or invalid 'id'{where}")
    raw = obj.get("points")
    if not isinstance(raw, list) or not raw:
        raise DatasetError(f"set {set_id!r}: missing or empty 'points'{where}")
    pts = []
    for entry in raw:
        if (
            not isinstance(entry, (list, tuple))
            or len(entry) != 2
            or not all(isinstance(c, (int, float)) for c in entry)
        ):
            raise DatasetError(f"set {set_id!r}: bad point {entry!r}{where}")
        pts.append(Point(float(entry[0]), float(entry[1])))
    try:
        return PointSet(set_id, tuple(pts))
    except ValueError as exc:
        raise DatasetError(str(exc) + where) from exc


def load_sets(path: str | Path) -> list[PointSet]:
    sets: list[PointSet] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"line {lineno}: invalid JSON: {exc}") from exc
            ps = parse_record(obj, lineno)
            if ps.id in seen:
                raise DatasetError(f"duplicate set id {ps.id!r} (line {lineno})")
            seen.add(ps.id)
            sets.append(ps)
    if not sets:
        raise DatasetError(f"{path}: no point sets found")
    return sets


def save_sets(path: str | Path, sets: Iterable[PointSet]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ps in sets:
            fh.write(
                json.dumps(
                    {"id": ps.id, "points": [[p.x, p.y] for p in ps.points]}
                )
                + "\n"
            )


def generate_sets(
    count: int,
    n_min: int,
    n_max: int,
    rng: random.Random,
    prefix: str = "set",
) -> list[PointSet]:
    """Uniform random point sets; Mersenne Twister via random.Random(seed)."""
    if count < 1 or n_min < 1 or n_max < n_min:
        raise DatasetError("invalid generation parameters")
    out = []
    for i in range(count):
        n = rng.randint(n_min, n_max)
        pts = tuple(Point(rng.random(), rng.random()) for _ in range(n))
        out.append(PointSet(f"{prefix}-{i:04d}", pts))
    return out


def perturb(
    ps: PointSet, eps: float, rng: random.Random, new_id: str | None = None
) -> PointSet:
    """Jitter each coordinate by up to +-eps (clamped) and shuffle the order."""
    pts = [
        Point(
            min(max(p.x + rng.uniform(-eps, eps), 0.0), 1.0),
            min(max(p.y + rng.uniform(-eps, eps), 0.0), 1.0),
        )
        for p in ps.points
    ]
    rng.shuffle(pts)
    return PointSet(new_id or f"{ps.id}-perturbed", tuple(pts))


def subset_of(
    ps: PointSet, k: int, rng: random.Random, new_id: str | None = None
) -> PointSet:
    """Random k-point subsequence of ps (order shuffled)."""
    if not (1 <= k <= len(ps)):
        raise DatasetError(f"subset size {k} out of range for |{ps.id}|={len(ps)}")
    pts = rng.sample(list(ps.points), k)
    return PointSet(new_id or f"{ps.id}-sub{k}", tuple(pts))
