from fractions import Fraction

import pytest

from freelip.metric import MetricError
from freelip.oracles import brute_derived
from freelip.towers import (EMPTY, Tower, TowerSpace, cb_derivative, cb_rank, parse_point, point_id,
                            shallowest, truncate, truncate_with_keys)


def rank1_half():
    # {0} ∪ {2^-k}: rank 1, ratio 1/2
    return TowerSpace.single(1, "1/2", 0, 2, depth=6)


def test_rank1_derivative_is_the_limit_point():
    t = rank1_half()
    d = cb_derivative(t, 1)
    assert d.keys() == [(0,)]
    assert d.coordinate((0,)) == 0


def test_finite_space_derivative_is_empty(line3):
    assert cb_derivative(line3, 1) is EMPTY
    assert cb_derivative(line3, 0) is line3
    assert cb_rank(line3) == 0


def test_rank2_derivative_matches_brute_force():
    t = TowerSpace.single(2, "1/4", 0, 1, depth=6)
    d = cb_derivative(t, 1)
    fs, keys = truncate_with_keys(t)
    sym = {fs.coords[i] for i, k in enumerate(keys) if d.contains_key(k)}
    assert sym == brute_derived(t, 6, 1)
    assert {k for k in keys if d.contains_key(k)} == {(0,)} | {(0, i) for i in range(1, 7)}
    assert cb_rank(d) == 1


def test_derivative_beyond_rank_is_empty():
    t = TowerSpace.single(2, depth=3)
    assert cb_derivative(t, 3).is_empty()
    assert cb_rank(cb_derivative(t, 3)) == 0


@pytest.mark.parametrize("rank", [0, 1, 2, 3])
def test_cb_rank(rank):
    assert cb_rank(TowerSpace.single(rank, depth=3)) == rank


def test_cb_rank_by_iterating_derivatives():
    t = TowerSpace.single(3, depth=2)
    steps = 0
    while not cb_derivative(t, steps).is_empty() and cb_derivative(t, steps).rank > 0:
        steps += 1
    assert steps == 3 == cb_rank(t)


def test_truncate_rank1_depth3():
    # scale 2, ratio 1/2: children at 2 * (1/2)^i
    fs = truncate(rank1_half(), 3)
    assert fs.n == 4
    assert sorted(fs.coords) == [0, Fraction(1, 4), Fraction(1, 2), 1]


def test_truncate_rank0_adjoins_basepoint():
    t = TowerSpace.single(0, anchor=5, depth=1)
    fs = truncate(t)
    assert fs.n == 2 and sorted(fs.coords) == [0, 5]
    assert fs.points[fs.base] == "base"


def test_truncate_rank2_depth2_has_seven_points():
    fs = truncate(TowerSpace.single(2, depth=2))
    assert fs.n == 7


def test_truncation_coordinates_are_distinct():
    for rank in range(4):
        fs = truncate(TowerSpace.single(rank, depth=4))
        assert len(set(fs.coords)) == fs.n


def test_ratio_above_quarter_rejected_for_rank2():
    with pytest.raises(MetricError):
        Tower(2, "1/3", 0, 1)


def test_overlapping_components_rejected():
    with pytest.raises(MetricError):
        TowerSpace((Tower(1, "1/4", 0, 4), Tower(1, "1/4", 1, 1)))


def test_point_ids_round_trip():
    t = TowerSpace((Tower(1, "1/4", 0, 1), Tower(2, "1/4", 3, 1)), depth=3)
    for k in t.keys():
        assert parse_point(t, point_id(t, k)) == k
    assert point_id(t, (1, 2, 1)) == "1:2.1"
    t2 = TowerSpace.single(1, anchor=1, depth=2)
    assert parse_point(t2, "base") == t2.base_key
    assert parse_point(t2, [2]) == (0, 2)
    with pytest.raises(KeyError):
        parse_point(t2, "0:1.1")


def test_shallowest_order():
    t = TowerSpace.single(2, depth=10)
    # smallest maximal index first, then shorter paths, then lexicographic
    assert [point_id(t, k) for k in shallowest(t, 10)] == [
        "0:", "0:1", "0:1.1", "0:2", "0:1.2", "0:2.1", "0:2.2", "0:3", "0:1.3", "0:2.3"]


def test_tower_json_round_trip():
    t = TowerSpace((Tower(1, "1/4", 0, 1), Tower(2, "1/8", 3, "1/2")), depth=4)
    assert TowerSpace.from_json(t.to_json()) == t
    s = TowerSpace.single(3, "1/4", 0, 2, depth=2)
    assert TowerSpace.from_json(s.to_json()) == s
