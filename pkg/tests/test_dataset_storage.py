import json
import random

import pytest

from bottletrie.compact import CompactIndex
from bottletrie.dataset import (
    DatasetError,
    generate_sets,
    load_sets,
    perturb,
    save_sets,
    subset_of,
)
from bottletrie.geometry import point_set
from bottletrie.multisnap import MultiSnapIndex
from bottletrie.storage import StorageError, load_index, save_index


def test_jsonl_round_trip(tmp_path):
    rng = random.Random(81)
    sets = generate_sets(10, 1, 5, rng)
    path = tmp_path / "db.jsonl"
    save_sets(path, sets)
    back = load_sets(path)
    assert [ps.id for ps in back] == [ps.id for ps in sets]
    assert back[3].points == sets[3].points


def test_load_rejects_bad_records(tmp_path):
    path = tmp_path / "bad.jsonl"

    def write(text):
        path.write_text(text)

    write("not json\n")
    with pytest.raises(DatasetError):
        load_sets(path)
    write('{"id": "a"}\n')
    with pytest.raises(DatasetError):
        load_sets(path)
    write('{"id": "a", "points": [[0.1, 2.0]]}\n')
    with pytest.raises(DatasetError):
        load_sets(path)
    write('{"id": "a", "points": [[0.1]]}\n')
    with pytest.raises(DatasetError):
        load_sets(path)
    write(
        '{"id": "a", "points": [[0.1, 0.1]]}\n'
        '{"id": "a", "points": [[0.2, 0.2]]}\n'
    )
    with pytest.raises(DatasetError, match="duplicate"):
        load_sets(path)
    write("")
    with pytest.raises(DatasetError):
        load_sets(path)


def test_generation_is_seeded():
    a = generate_sets(5, 1, 4, random.Random(7))
    b = generate_sets(5, 1, 4, random.Random(7))
    assert a == b
    c = generate_sets(5, 1, 4, random.Random(8))
    assert a != c


def test_perturb_stays_in_box():
    rng = random.Random(82)
    ps = point_set("edge", [(0.0, 0.0), (1.0, 1.0)])
    for _ in range(50):
        q = perturb(ps, 0.5, rng)
        for p in q.points:
            assert 0.0 <= p.x <= 1.0 and 0.0 <= p.y <= 1.0


def test_subset_of_bounds():
    rng = random.Random(83)
    ps = point_set("s", [(0.1, 0.1), (0.2, 0.2), (0.3, 0.3)])
    sub = subset_of(ps, 2, rng)
    assert len(sub) == 2
    assert set(sub.points) <= set(ps.points)
    with pytest.raises(DatasetError):
        subset_of(ps, 4, rng)


@pytest.mark.parametrize("kind", ["compact", "multisnap"])
def test_index_save_load_round_trip(tmp_path, kind):
    rng = random.Random(84)
    db = generate_sets(6, 1, 4, rng)
    if kind == "compact":
        index = CompactIndex(d_max=8)
    else:
        index = MultiSnapIndex(d_max=8)
    for ps in db:
        index.insert(ps)
    path = tmp_path / "idx.bin"
    save_index(path, index)
    back = load_index(path)
    assert type(back) is type(index)
    assert back.d_max == 8
    assert set(back.registry) == set(index.registry)
    assert back.node_count() == index.node_count()
    # queries work the same on the reloaded index
    Q = perturb(db[0], 0.01, rng, new_id="q")
    assert back.query_nearest(Q).ids == index.query_nearest(Q).ids


def test_load_rejects_corruption(tmp_path):
    rng = random.Random(85)
    index = CompactIndex(d_max=4)
    index.insert(generate_sets(1, 2, 2, rng)[0])
    path = tmp_path / "idx.bin"
    save_index(path, index)
    raw = path.read_bytes()

    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"NOTANIDX" + raw[8:])
    with pytest.raises(StorageError, match="magic"):
        load_index(bad)
    bad.write_bytes(raw[:-3])
    with pytest.raises(StorageError):
        load_index(bad)
    bad.write_bytes(raw + b"\x00\x00")
    with pytest.raises(StorageError):
        load_index(bad)
