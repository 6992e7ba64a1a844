import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from freelip.free_space import (FreeOperator, Molecule, SolverDisagreement, apply, attaining_function, kr_norm,
                                operator_norm, pair, push_to_quotient, quotient_distance)
from freelip.kalton import ShellSystem, kalton_S, molecule_battery
from freelip.lipschitz import LipFn, lip_norm
from freelip.metric import FiniteSpace, MetricError, line_space
from freelip.oracles import vertex_norm
from freelip.sampling import random_lipfn, random_molecule, random_space
from freelip.towers import TowerSpace, truncate


def test_delta_norm_is_distance(line3):
    for i in (1, 2):
        assert kr_norm(Molecule.delta(line3, i)) == line3.dist[0][i]


def test_normalized_pair_has_norm_one(rng):
    sp = random_space(rng, 6)
    for i in range(6):
        for j in range(i + 1, 6):
            assert kr_norm(Molecule.pair_molecule(sp, i, j)) == 1


def test_line_example_norm_three(line3):
    m = Molecule(line3, {1: 1, 2: 1})
    assert kr_norm(m) == 3
    assert vertex_norm(line3, m.as_dict()) == 3


def test_zero_molecule(line3):
    assert kr_norm(Molecule(line3, {})) == 0
    assert kr_norm(Molecule(line3, {0: 5})) == 0  # delta of the basepoint vanishes


def test_single_point_space():
    sp = FiniteSpace.from_matrix([[0]])
    assert kr_norm(Molecule(sp, {})) == 0


def test_methods_agree(line3):
    m = Molecule(line3, {1: 2, 2: -1})
    assert kr_norm(m, "primal") == kr_norm(m, "dual") == kr_norm(m, "both") == 2  # f = (0, 1, 0) attains it
    with pytest.raises(ValueError):
        kr_norm(m, "simplex")


def test_attaining_function_examples(line3):
    f = attaining_function(Molecule.delta(line3, 2))
    assert lip_norm(f) <= 1 and pair(Molecule.delta(line3, 2), f) == 2
    m = Molecule.pair_molecule(line3, 2, 1)
    g = attaining_function(m)
    assert g.values[2] - g.values[1] == line3.dist[1][2]
    with pytest.raises(ValueError):
        attaining_function(Molecule(line3, {}))


def test_attaining_on_random_molecules(rng):
    for _ in range(10):
        sp = random_space(rng, 5)
        m = random_molecule(rng, sp)
        if m.is_zero():
            continue
        f = attaining_function(m)
        assert lip_norm(f) <= 1
        assert pair(m, f) == kr_norm(m)


def test_pair_examples(line3):
    assert pair(Molecule.delta(line3, 2), LipFn.distance_to_base(line3)) == 2
    assert pair(Molecule(line3, {1: 1, 2: 1}), LipFn.zero(line3)) == 0
    assert pair(Molecule(line3, {1: 1, 2: 1}), LipFn(line3, (0, 1, 2))) == 3


def test_pair_space_mismatch(line3):
    with pytest.raises(MetricError):
        pair(Molecule.delta(line3, 1), LipFn.zero(line_space([0, 5, 6])))


def test_quotient_distance_examples(line4):
    assert quotient_distance(Molecule(line4, {3: 2}), [0, 3]) == 0
    m = Molecule(line4, {1: 1, 2: -3})
    assert quotient_distance(m, [0]) == kr_norm(m)
    d1 = Molecule.delta(line4, 1)
    assert quotient_distance(d1, [0, 3]) == 1 == kr_norm(push_to_quotient(d1, [0, 3]))
    with pytest.raises(MetricError):
        quotient_distance(d1, [3])


def test_operator_norm_examples(line3):
    assert operator_norm(FreeOperator.identity(line3)) == 1
    assert operator_norm(FreeOperator.zero(line3)) == 0
    two = FiniteSpace.from_matrix([[0, 1], [1, 0]], 0, ["0", "x"])
    assert operator_norm(FreeOperator.diagonal(two, [1, 2]), "both") == 2


def test_operator_norm_methods_agree(rng):
    sp = random_space(rng, 5)
    mat = np.array([[Fraction(rng.randint(-3, 3), 2) for _ in range(5)] for _ in range(5)], dtype=object)
    T = FreeOperator(sp, sp, mat)
    assert operator_norm(T, "primal") == operator_norm(T, "dual") == operator_norm(T, "both")


def test_apply_examples(line3):
    m = Molecule(line3, {1: 2, 2: -1})
    assert apply(FreeOperator.identity(line3), m) == m
    assert apply(FreeOperator.zero(line3), m).is_zero()


def test_basepoint_row_and_column_are_zeroed(line3):
    T = FreeOperator(line3, line3, np.ones((3, 3)))
    assert not T.matrix[:, 0].any() and not T.matrix[0, :].any()


def test_molecule_json_and_arithmetic(line3):
    m = Molecule(line3, {1: Fraction(1, 2), 2: -1})
    assert m.to_json() == {"1": "1/2", "2": -1}
    assert Molecule.from_json(line3, m.to_json()) == m
    assert (m - m).is_zero()
    assert m.scaled(2).as_dict() == {1: 1, 2: -2}
    with pytest.raises(IndexError):
        Molecule(line3, {7: 1})


@given(st.integers(0, 10**6), st.integers(2, 12))
def test_primal_dual_agree_float(seed, n):
    rng = random.Random(seed)
    sp = random_space(rng, n).to_float()
    m = random_molecule(rng, sp)
    kr_norm(m, "both")  # raises SolverDisagreement on a mismatch beyond 1e-9


@given(st.integers(0, 10**6), st.integers(2, 5))
def test_primal_dual_vertex_agree_exact(seed, n):
    rng = random.Random(seed)
    sp = random_space(rng, n)
    m = random_molecule(rng, sp)
    assert kr_norm(m, "primal") == kr_norm(m, "dual") == vertex_norm(sp, m.as_dict())


@given(st.integers(0, 10**6), st.integers(2, 8))
def test_norm_axioms_and_duality(seed, n):
    rng = random.Random(seed)
    sp = random_space(rng, n)
    a, b = random_molecule(rng, sp), random_molecule(rng, sp)
    c = Fraction(rng.randint(-5, 5), 3)
    assert kr_norm(a.scaled(c)) == abs(c) * kr_norm(a)
    assert kr_norm(a + b) <= kr_norm(a) + kr_norm(b)
    f = random_lipfn(rng, sp)
    L = lip_norm(f)
    if L:
        assert kr_norm(a) >= abs(pair(a, f)) / L


@given(st.integers(0, 10**6), st.integers(3, 8))
def test_quotient_identity(seed, n):
    rng = random.Random(seed)
    sp = random_space(rng, n)
    A = sorted({sp.base} | set(rng.sample(sp.others(), rng.randint(1, n - 2))))
    off = [i for i in range(n) if i not in A]
    m = random_molecule(rng, sp, off)
    assert quotient_distance(m, A) == kr_norm(push_to_quotient(m, A))


@given(st.integers(0, 10**6), st.integers(2, 5))
def test_operator_norm_submultiplicative(seed, n):
    rng = random.Random(seed)
    sp = random_space(rng, n)
    def rand_op():
        return FreeOperator(sp, sp, np.array([[Fraction(rng.randint(-2, 2)) for _ in range(n)] for _ in range(n)], dtype=object))
    T, S = rand_op(), rand_op()
    assert operator_norm(T.compose(S)) <= operator_norm(T) * operator_norm(S)


def test_exact_disagreement_is_raised(monkeypatch, line3):
    import freelip.free_space as fsmod
    monkeypatch.setattr(fsmod, "transport_cost", lambda space, coeff: (Fraction(99), {}))
    with pytest.raises(SolverDisagreement):
        kr_norm(Molecule.delta(line3, 1))


def test_float_solvers_agree_on_deep_tower_shells():
    # tiny distances next to large ones once pushed the dual solve past 1e-9
    fs = truncate(TowerSpace.single(2, "1/4", 0, 1, 7))
    sys = ShellSystem(fs)
    for g in molecule_battery(fs, 0):
        for N in range(10):
            kr_norm(apply(kalton_S(sys, N), g) - g, "both")
