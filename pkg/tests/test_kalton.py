import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from freelip.free_space import Molecule, apply, kr_norm, operator_norm
from freelip.kalton import (KALTON_BOUND, ShellSystem, bap_experiment, convergence_csv_rows, greedy_net,
                            kalton_S, kalton_T, molecule_battery, nearest_in, net_retraction, s_convergence)
from freelip.metric import FiniteSpace, line_space
from freelip.sampling import random_molecule, random_space


@pytest.fixture
def dyadic():
    return line_space([0, Fraction(1, 4), 1, 3, 8])


def test_bands_and_exact_ramp(dyadic):
    s = ShellSystem(dyadic)
    assert [s.band(i) for i in range(1, 5)] == [-2, 0, 2, 3]
    assert s.ramp(1) == 1 and s.ramp(4) == 1
    # a power of two sits entirely in its own band
    assert s.weight(0, 2) == 1 and s.weight(-1, 2) == 0


def test_geometric_midpoint_splits_evenly():
    sp = FiniteSpace.from_coordinates([0.0, 2 ** 1.5], 0, ["0", "x"])
    s = ShellSystem(sp)
    assert abs(s.weight(2, 1) - 0.5) <= 1e-12
    assert abs(s.weight(1, 1) - 0.5) <= 1e-12


def test_partition_of_unity(dyadic):
    s = ShellSystem(dyadic)
    for i in dyadic.others():
        assert sum(s.weight(n, i) for n in range(-6, 6)) == 1
    assert all(s.weight(n, 0) == 0 for n in range(-3, 3))


def test_shells(dyadic):
    s = ShellSystem(dyadic)
    assert s.K(0) == [0, 1, 2]
    assert s.O(0) == [0, 1]
    assert s.F(0) == [2]
    assert s.F(1) == [1, 2, 3]
    with pytest.raises(ValueError):
        s.F(-1)


def test_T_is_diagonal(dyadic):
    T = kalton_T(ShellSystem(dyadic), 2)
    m = Molecule(dyadic, {3: 1, 4: 1})
    out = apply(T, m).as_dict()
    assert set(out) <= {3, 4}


def test_S_is_identity_one_band_after_cover(dyadic):
    s = ShellSystem(dyadic)
    g = Molecule(dyadic, {1: 2, 3: -1, 4: 1})
    assert set(g.as_dict()) <= set(s.F(2))
    # 3 lies strictly inside band 2, so S_2 still misses part of its mass
    assert apply(kalton_S(s, 2), g) != g
    assert apply(kalton_S(s, 3), g) == g
    with pytest.raises(ValueError):
        kalton_S(s, -1)


def test_S_norm_below_bound(rng):
    for _ in range(5):
        sp = random_space(rng, 6)
        s = ShellSystem(sp)
        for N in range(5):
            assert operator_norm(kalton_S(s, N)) <= KALTON_BOUND


@given(st.integers(0, 10**6), st.integers(2, 8))
def test_S_error_vanishes_eventually(seed, n):
    rng = random.Random(seed)
    sp = random_space(rng, n)
    g = random_molecule(rng, sp)
    s = ShellSystem(sp)
    supp = set(g.as_dict())
    N = next(N for N in range(1, 60) if supp <= set(s.F(N - 1)))
    assert kr_norm(apply(kalton_S(s, N), g) - g) == 0


def test_greedy_net_and_nearest(dyadic):
    net = greedy_net(dyadic, Fraction(3, 2))
    assert net == [0, 3, 4]
    assert all(min(dyadic.dist[i][j] for j in net) <= Fraction(3, 2) for i in range(dyadic.n))
    assert nearest_in(dyadic, net, 2) == 0
    with pytest.raises(ValueError):
        greedy_net(dyadic, 0)


def test_net_retraction_examples(dyadic):
    R, norm = net_retraction(dyadic, Fraction(1, 10))
    assert norm == 1  # every point is its own net point
    R, norm = net_retraction(dyadic, 100)
    assert norm == 0  # everything goes to the basepoint
    R, norm = net_retraction(dyadic, Fraction(3, 2))
    assert norm == operator_norm(R, "dual") >= 1


def test_molecule_battery_is_deterministic(dyadic):
    a = molecule_battery(dyadic, 3)
    assert a == molecule_battery(dyadic, 3)
    assert len(a) == 9 and all(not m.is_zero() for m in a)
    assert molecule_battery(FiniteSpace.from_matrix([[0]]), 0) == []


def test_bap_experiment_small(dyadic):
    rep = bap_experiment(dyadic, [0, 3], [Fraction(1, 8)], seed=1)
    assert rep["kalton_bound_holds"]
    assert len(rep["cells"]) == 2
    last = rep["cells"][-1]
    assert last["rank"] <= dyadic.n - 1
    assert max(last["errors"]) == 0
    rows = convergence_csv_rows(rep)
    assert rows[0] == ["N", "mesh", "molecule", "error_Q"] and len(rows) == 1 + 2 * 9


def test_s_convergence_records_first_cover(dyadic):
    rows = s_convergence(dyadic, range(5), [Molecule.delta(dyadic, 4)])
    assert rows[0]["first_cover"] == 2
    assert rows[0]["errors"][-1] == 0
