from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from freelip.metric import FiniteSpace, MetricError, line_space, quotient, validate_metric
from freelip.sampling import random_space
import random


def test_line_is_a_metric(line3):
    assert validate_metric(line3).valid


def test_triangle_violation_reports_witness():
    sp = FiniteSpace.from_matrix([[0, 1, 5], [1, 0, 1], [5, 1, 0]], 0, ["a", "b", "c"])
    rep = validate_metric(sp)
    assert not rep.valid
    tri = [v for v in rep.violations if v["axiom"] == "triangle"]
    assert {"axiom": "triangle", "witness": ["a", "b", "c"]} in tri


def test_diagonal_violation():
    sp = FiniteSpace.from_matrix([[0.1, 1], [1, 0]], 0, ["a", "b"])
    rep = validate_metric(sp)
    assert [v["axiom"] for v in rep.violations] == ["diagonal"]


def test_positivity_and_symmetry_violations():
    sp = FiniteSpace.from_matrix([[0, 0, 1], [0, 0, 1], [2, 1, 0]], 0)
    axioms = {v["axiom"] for v in validate_metric(sp).violations}
    assert {"positivity", "symmetry"} <= axioms


def test_quotient_line_example(line4):
    q, keep = quotient(line4, [0, 3])
    assert [line4.points[i] for i in keep] == ["0", "1", "2"]
    one, two = keep.index(1), keep.index(2)
    assert q.dist[one][q.base] == 1
    assert q.dist[one][two] == 1
    assert q.dist[two][q.base] == 1


def test_quotient_by_basepoint_is_identity(line4):
    q, keep = quotient(line4, [0])
    assert keep == [0, 1, 2, 3]
    assert [list(r) for r in q.dist] == [list(r) for r in line4.dist]


def test_quotient_by_everything_is_a_point(line4):
    q, keep = quotient(line4, range(4))
    assert q.n == 1 and keep == [0]


def test_quotient_needs_basepoint(line4):
    with pytest.raises(MetricError):
        quotient(line4, [1, 2])


@given(st.integers(0, 10_000), st.integers(3, 9))
def test_quotients_are_metrics_and_shrink_distances(seed, n):
    rng = random.Random(seed)
    sp = random_space(rng, n)
    A = [sp.base] + rng.sample(sp.others(), rng.randint(0, n - 2))
    q, keep = quotient(sp, A)
    assert validate_metric(q).valid
    for a, i in enumerate(keep):
        for b, j in enumerate(keep):
            if i != sp.base and j != sp.base:
                assert q.dist[a][b] <= sp.dist[i][j]


def test_json_round_trip_is_exact():
    sp = FiniteSpace.from_matrix([[0, Fraction(1, 3), 0.5], [Fraction(1, 3), 0, 0.25], [0.5, 0.25, 0]], 1, ["a", "b", "c"])
    back = FiniteSpace.from_json(sp.to_json())
    assert back.to_json() == sp.to_json()
    assert back.dist[0][1] == Fraction(1, 3) and back.dist[0][2] == 0.5 and back.base == 1


def test_line_space_round_trip_and_subspace():
    sp = line_space([0, 1, 3, 7])
    back = FiniteSpace.from_json(sp.to_json())
    assert [list(r) for r in back.dist] == [list(r) for r in sp.dist]
    sub = sp.subspace([0, 2, 3])
    assert sub.points == ("0", "3", "7") and sub.dist[1][2] == 4


def test_subspace_needs_basepoint():
    with pytest.raises(MetricError):
        line_space([0, 1, 2]).subspace([1, 2])


def test_rational_and_float_conversions():
    sp = FiniteSpace.from_matrix([[0, 0.5], [0.5, 0]])
    assert not sp.exact
    assert sp.to_rational().exact and sp.to_rational().dist[0][1] == Fraction(1, 2)
    assert sp.to_rational().to_float().dist[0][1] == 0.5
