import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robustquota import (CARA, EmptyMechanismError, FixedTaxHardQuota,
                         LevelGrid, TabulatedMechanism, Zero, agent_value,
                         cara_pair, full_revelation, no_learning,
                         one_shot_level, principal_value, quadratic_pair,
                         random_tree, simulate, single_split, solve_stopping)
from robustquota.adversary import indifference_G


def test_no_learning_under_robust_mechanism_binds():
    """Defining property of the constructed mechanism: the uninformed agent
    stops at the quota with value exactly U(mu0, 0) = 0."""
    agent, principal = quadratic_pair(1.0, 1.0, 1.0)
    grid = LevelGrid(2.0, 2001)
    m = FixedTaxHardQuota(0.1, 0.5)
    sol = solve_stopping(no_learning(0.6, grid), agent, m)
    assert sol.joint_level.tolist() == [0.5]
    assert sol.joint_mass.tolist() == [1.0]
    assert sol.root_value == pytest.approx(0.0, abs=1e-12)
    assert sol.participation
    assert principal_value(sol, principal, m) == pytest.approx(0.1, abs=1e-9)


def test_full_revelation_branches_decouple():
    agent, principal = cara_pair(1.0, 3.0)
    grid = LevelGrid(2.0, 101)
    sol = solve_stopping(full_revelation(0.6, grid), agent, Zero())
    stops = dict(zip(sol.joint_belief, sol.joint_level))
    assert stops[1.0] == one_shot_level(agent, 1.0, grid)
    assert stops[0.0] == one_shot_level(agent, 0.0, grid)
    expected = 0.6 * principal.indirect(1.0, stops[1.0]) \
        + 0.4 * principal.indirect(0.0, stops[0.0])
    assert principal_value(sol, principal, Zero()) == pytest.approx(expected)


def test_all_prohibited_raises():
    grid = LevelGrid(1.0, 5)
    m = TabulatedMechanism(grid, tuple([float("inf")] * 5))
    with pytest.raises(EmptyMechanismError):
        solve_stopping(no_learning(0.5, grid), CARA(1.0), m)


def test_joint_mass_sums_to_one_and_conserves_belief():
    grid = LevelGrid(2.0, 15)
    tree = random_tree(0.6, grid, seed=7)
    sol = solve_stopping(tree, CARA(1.0), Zero())
    assert sol.joint_mass.sum() == pytest.approx(1.0, abs=1e-12)
    assert float(sol.joint_belief @ sol.joint_mass) == pytest.approx(0.6,
                                                                     abs=1e-9)


def test_nonparticipation_returns_outside_option():
    agent, principal = quadratic_pair(1.0, 1.0, 1.0)
    grid = LevelGrid(1.0, 11)
    m = FixedTaxHardQuota(5.0, 1.0)  # punitive flat tax
    sol = solve_stopping(no_learning(0.6, grid), agent, m)
    assert not sol.participation
    assert agent_value(sol) == sol.outside_option
    assert principal_value(sol, principal, m) == pytest.approx(
        principal.indirect(0.6, 0.0))


@given(seed=st.integers(0, 2_000))
@settings(max_examples=40, deadline=None)
def test_learning_never_hurts_the_agent(seed):
    """Agent root value under any process dominates the no-learning value."""
    agent, _ = cara_pair(1.0, 3.0)
    grid = LevelGrid(2.0, 8)
    m = FixedTaxHardQuota(0.05, 1.5)
    tree = random_tree(0.6, grid, seed)
    base = solve_stopping(no_learning(0.6, grid), agent, m).root_value
    assert solve_stopping(tree, agent, m).root_value >= base - 1e-10


def test_value_nonincreasing_in_tax():
    agent, _ = quadratic_pair(1.0, 1.0, 1.0)
    grid = LevelGrid(2.0, 21)
    tree = random_tree(0.6, grid, seed=3)
    lo = solve_stopping(tree, agent, FixedTaxHardQuota(0.05, 1.0)).root_value
    hi = solve_stopping(tree, agent, FixedTaxHardQuota(0.10, 1.0)).root_value
    assert hi <= lo + 1e-12


def test_simulate_deterministic_process_is_exact():
    grid = LevelGrid(2.0, 21)
    agent, _ = quadratic_pair(1.0, 1.0, 1.0)
    sol = solve_stopping(no_learning(0.6, grid), agent, Zero())
    levels, beliefs, mass = simulate(no_learning(0.6, grid), sol, 10, seed=1)
    assert mass.tolist() == [1.0]
    assert levels[0] == sol.joint_level[0]


def test_simulate_same_seed_identical():
    grid = LevelGrid(2.0, 11)
    tree = random_tree(0.6, grid, seed=5)
    agent, _ = cara_pair(1.0, 3.0)
    sol = solve_stopping(tree, agent, Zero())
    a = simulate(tree, sol, 500, seed=42)
    b = simulate(tree, sol, 500, seed=42)
    for x, y in zip(a, b):
        assert np.array_equal(x, y)


def test_simulate_within_dkw_band():
    """Empirical stopping-level CDF stays inside the 99% DKW band of the
    exact joint distribution."""
    agent, principal = cara_pair(1.0, 3.0)
    grid = LevelGrid(2.0, 41)
    ind = indifference_G(agent, Zero(), grid, 0.5, principal)
    proc = ind.bn.to_process()
    sol = solve_stopping(proc, agent, Zero())
    n = 20_000
    levels, _, mass = simulate(proc, sol, n, seed=11)
    eps = np.sqrt(np.log(2.0 / 0.01) / (2.0 * n))
    exact_lv, exact_m = sol.joint_level, sol.joint_mass
    for q in np.linspace(0.0, 2.0, 9):
        emp = mass[levels <= q + 1e-12].sum()
        ex = exact_m[exact_lv <= q + 1e-12].sum()
        assert abs(emp - ex) <= eps
