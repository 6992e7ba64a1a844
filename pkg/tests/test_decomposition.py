import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from freelip.decomposition import (DecompositionError, derived_indices, l1_sum_check, lower_constant,
                                   partition_gap, phi_map, phi_norm, phi_sandwich_check,
                                   quotient_isometry_check, split_by_part)
from freelip.free_space import Molecule, kr_norm
from freelip.lipschitz import LipFn
from freelip.metric import MetricError, line_space
from freelip.sampling import random_space
from freelip.towers import TowerSpace, truncate_with_keys


@pytest.fixture
def two_clusters():
    # parts {0, 1} and {10, 11}; gap 9, diameter 11
    return line_space([0, 1, 10, 11])


PARTS = [{0, 1}, {2, 3}]


def test_gap_and_lower_constant(two_clusters):
    assert partition_gap(two_clusters, PARTS) == 9
    assert lower_constant(two_clusters, PARTS) == Fraction(9, 22)
    assert partition_gap(two_clusters, [{0, 1, 2, 3}]) is None
    assert lower_constant(two_clusters, [{0, 1, 2, 3}]) == 1


def test_bad_partitions(two_clusters):
    with pytest.raises(DecompositionError):
        partition_gap(two_clusters, [{0, 1}, {1, 2, 3}])
    with pytest.raises(DecompositionError):
        partition_gap(two_clusters, [{0, 1}, {2}])


def test_phi_examples(two_clusters):
    f = LipFn(two_clusters, (0, 1, 10, 11))
    pieces = phi_map(two_clusters, PARTS, f)
    assert [p.space.points for p in pieces] == [("0", "1"), ("0", "10", "11")]
    assert phi_norm(two_clusters, PARTS, f) == 1
    # the jump of a/2 across the gap costs slope 1/2 on K but only 9/20 on the far piece
    g = LipFn(two_clusters, (0, 0, Fraction(9, 2), Fraction(9, 2)))
    assert phi_norm(two_clusters, PARTS, g) == Fraction(9, 20)
    with pytest.raises(MetricError):
        phi_map(two_clusters, PARTS, LipFn.zero(line_space([0, 1])))


def test_sandwich_on_clusters(two_clusters):
    rep = phi_sandwich_check(two_clusters, PARTS, 50, seed=3)
    assert rep["violations"] == []
    assert rep["worst_ratio"] >= rep["lower_constant"]


def test_split_and_l1(two_clusters):
    m = Molecule(two_clusters, {1: 1, 2: -1, 3: 2})
    a, b = split_by_part(m, PARTS)
    assert a.as_dict() == {1: 1} and b.as_dict() == {2: -1, 3: 2}
    assert kr_norm(m) <= kr_norm(a) + kr_norm(b)
    rep = l1_sum_check(two_clusters, PARTS, 40, seed=1)
    assert rep["violations"] == [] and rep["factor"] == Fraction(22, 9)


def test_quotient_examples():
    sp = line_space([0, 1, 2, 3])
    rep = quotient_isometry_check(sp, [0, 3], 0, molecules=[Molecule.delta(sp, 1), Molecule.delta(sp, 2, 3)])
    assert rep["ok"] and rep["max_discrepancy"] == 0
    assert [r[1] for r in rep["rows"]] == [1, 3]
    with pytest.raises(MetricError):
        quotient_isometry_check(sp, [1], 5)


@given(st.integers(0, 10**6), st.integers(3, 8))
def test_sandwich_random_partitions(seed, n):
    rng = random.Random(seed)
    sp = random_space(rng, n)
    labels = [rng.randrange(3) for _ in range(n)]
    parts = [{i for i in range(n) if labels[i] == k} for k in range(3)]
    parts = [p for p in parts if p]
    assert phi_sandwich_check(sp, parts, 10, seed)["violations"] == []
    assert l1_sum_check(sp, parts, 10, seed)["violations"] == []


@given(st.integers(0, 10**6), st.integers(3, 8))
def test_quotient_random_float(seed, n):
    rng = random.Random(seed)
    sp = random_space(rng, n).to_float()
    A = sorted({sp.base} | set(rng.sample(sp.others(), rng.randint(1, n - 2))))
    assert quotient_isometry_check(sp, A, 5, seed)["ok"]


def test_derived_indices_rank_one():
    t = TowerSpace.single(1, "1/4", 0, 1, 5)
    fs, keys = truncate_with_keys(t)
    idx = derived_indices(t, 1)
    assert [fs.points[i] for i in idx] == ["0:"]
    assert len(derived_indices(t, 0)) == fs.n
