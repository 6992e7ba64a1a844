from fractions import Fraction

from freelip.metric import FiniteSpace
from freelip.oracles import (accumulation_points_of, brute_derived, brute_lip_norm, ladder_derived,
                             lip_ball_vertices, vertex_norm)
from freelip.towers import TowerSpace


def test_vertices_of_two_point_space():
    sp = FiniteSpace.from_matrix([[0, 2], [2, 0]])
    assert lip_ball_vertices(sp) == [(0, -2), (0, 2)]


def test_vertices_on_line(line3):
    verts = lip_ball_vertices(line3)
    assert (0, 1, 2) in verts and (0, 1, 0) in verts and (0, -1, -2) in verts
    assert all(abs(f[1] - f[2]) <= 1 and abs(f[1]) <= 1 for f in verts)
    assert vertex_norm(line3, {1: 1, 2: 1}, verts) == 3


def test_brute_lip_norm(line3):
    assert brute_lip_norm(line3, (0, 1, Fraction(3, 2))) == 1
    assert brute_lip_norm(line3, (0, 0, 0)) == 0


def test_accumulation_step():
    # 0 keeps gaining neighbours, 5 does not
    assert accumulation_points_of([0, 5, 1], [0, 5, 1, Fraction(1, 2)], [0, 5, 1, Fraction(1, 2), Fraction(1, 4)]) == [0]


def test_ladder_on_harmonic_sequence():
    def coords(d):
        return [0] + [Fraction(1, k) for k in range(1, d + 1)]
    assert ladder_derived(coords, 4, 1) == {0}
    assert ladder_derived(coords, 4, 2) == frozenset()


def test_brute_derived_rank_two():
    t = TowerSpace.single(2, "1/4", 0, 1, 3)
    first = brute_derived(t, 3, 1)
    assert 0 in first and len(first) == 4  # the root and its three rank-one children
    assert brute_derived(t, 3, 2) == {0}
    assert brute_derived(t, 3, 3) == frozenset()
