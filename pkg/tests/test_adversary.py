import numpy as np
import pytest

from robustquota import (BudgetExceededError, FixedTaxHardQuota, LevelGrid,
                         Zero, cara_pair, compute_robust, quadratic_pair)
from robustquota.adversary import (badnews_value, dual_certificate,
                                   indifference_G, payoff_gap,
                                   principal_prefers_earlier, solve_badnews_lp,
                                   stop_rule_at_zero, tree_oracle_worst_case)


def test_stop_rule_at_zero_largest_argmax_tail():
    vals = np.array([3.0, 1.0, 3.0, 2.0, 0.0])
    # from each index, the largest maximizer of the tail
    assert stop_rule_at_zero(vals).tolist() == [2, 2, 2, 3, 4]


def test_lp_attains_guarantee_under_robust_mechanism():
    agent, principal = quadratic_pair(1.0, 1.0, 1.0)
    grid = LevelGrid(2.0, 201)
    rob = compute_robust(agent, principal, 0.6, grid)
    lp = solve_badnews_lp(agent, principal, rob.mechanism, grid, 0.6)
    assert lp.value == pytest.approx(rob.guarantee, abs=1e-9)


def test_simplex_and_highs_agree():
    agent, principal = cara_pair(1.0, 3.0)
    grid = LevelGrid(2.0, 121)
    a = solve_badnews_lp(agent, principal, Zero(), grid, 0.5, solver="simplex")
    b = solve_badnews_lp(agent, principal, Zero(), grid, 0.5, solver="highs")
    assert a.value == pytest.approx(b.value, rel=1e-8)


def test_lp_matches_indifference_value():
    agent, principal = cara_pair(1.0, 3.0)
    grid = LevelGrid(2.0, 201)
    lp = solve_badnews_lp(agent, principal, Zero(), grid, 0.5)
    ind = indifference_G(agent, Zero(), grid, 0.5, principal)
    assert not ind.used_lp_fallback
    iv = badnews_value(ind.bn, agent, principal, Zero())
    assert lp.value == pytest.approx(iv, rel=1e-7)


def test_indifference_matches_cara_closed_form_G():
    """Under laissez-faire the binding construction has survivor function
    mu0 (1 + e^{-2 gamma l}) when the prior keeps the whole grid interior."""
    agent, principal = cara_pair(1.0, 3.0)
    grid = LevelGrid(2.0, 401)
    ind = indifference_G(agent, Zero(), grid, 0.5, principal)
    l = grid.points[:-1]          # terminal atom handled separately
    expected = 1.0 - 0.5 * (1.0 + np.exp(-2.0 * l))
    assert np.allclose(ind.bn.G[:-1], expected, atol=5e-3)
    # terminal atom: mu0 e^{-2 gamma l_max}
    g_end = ind.bn.increments()[-1]
    assert g_end == pytest.approx(0.5 * np.exp(-4.0), rel=2e-2)


@pytest.mark.parametrize("mu0", [0.4, 0.5, 0.6])
def test_weak_duality_always(mu0):
    agent, principal = cara_pair(1.0, 3.0)
    grid = LevelGrid(2.0, 301)
    cert = dual_certificate(agent, principal, Zero(), grid, mu0)
    assert cert.dual_bound <= cert.primal_value + 1e-7 * abs(cert.primal_value)


def test_dual_tight_when_support_reaches_zero():
    agent, principal = cara_pair(1.0, 3.0)
    grid = LevelGrid(2.0, 501)
    cert = dual_certificate(agent, principal, Zero(), grid, 0.5)
    assert cert.lbar == 0.0
    assert abs(cert.gap) <= 1e-4 * abs(cert.primal_value)


def test_premise_detection():
    grid = LevelGrid(2.0, 201)
    agent, principal = cara_pair(1.0, 3.0)
    assert principal_prefers_earlier(agent, principal, Zero(), grid)
    # swapped: the "principal" develops further than the agent
    assert not principal_prefers_earlier(principal, agent, Zero(), grid)


def test_oracle_budget_enforced():
    agent, principal = quadratic_pair(1.0, 1.0, 1.0)
    with pytest.raises(BudgetExceededError):
        tree_oracle_worst_case(agent, principal, Zero(), LevelGrid(1.0, 5),
                               [0.0, 0.5, 1.0], 0.5)
    with pytest.raises(BudgetExceededError):
        tree_oracle_worst_case(agent, principal, Zero(), LevelGrid(1.0, 3),
                               np.linspace(0, 1, 6), 0.5)


def test_oracle_never_beats_lp_when_premise_holds():
    agent, principal = quadratic_pair(1.0, 1.0, 1.0)
    grid = LevelGrid(1.0, 3)
    lp = solve_badnews_lp(agent, principal, Zero(), grid, 0.6,
                          solver="simplex")
    assert lp.premise_ok
    beliefs = sorted({0.0, *np.round(lp.bn.cont_belief(), 12)})
    oracle = tree_oracle_worst_case(agent, principal, Zero(), grid, beliefs,
                                    0.6)
    assert oracle.value == pytest.approx(lp.value, abs=1e-8)


def test_payoff_gap_zero_for_robust_mechanism():
    agent, principal = quadratic_pair(1.0, 1.0, 1.0)
    grid = LevelGrid(2.0, 201)
    rob = compute_robust(agent, principal, 0.6, grid)
    gap = payoff_gap(rob.mechanism, agent, principal, grid, 0.6)
    assert gap.delta == pytest.approx(0.0, abs=1e-8)
    assert gap.route == "badnews_lp"


def test_payoff_gap_positive_for_laissez_faire():
    agent, principal = quadratic_pair(1.0, 1.0, 1.0)
    grid = LevelGrid(4.0, 201)
    gap = payoff_gap(Zero(), agent, principal, grid, 0.6)
    assert gap.delta > 0.5   # the quadratic externality bites hard
