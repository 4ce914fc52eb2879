import numpy as np
import pytest

from robustquota import (AlignmentError, BinaryExperiment, LevelGrid,
                         binomial_tree, cara_pair, compute_robust,
                         evaluate_adaptive, no_learning, quadratic_pair,
                         refine_process, solve_adaptive_quota)

AGENT, PRINCIPAL = quadratic_pair(1.0, 1.0, 1.0)
GRID = LevelGrid(2.0, 9)


def test_degenerate_tree_reproduces_static_bitwise():
    grid = LevelGrid(2.0, 2001)
    static = compute_robust(AGENT, PRINCIPAL, 0.6, grid)
    pol = solve_adaptive_quota(no_learning(0.6, grid), AGENT, PRINCIPAL)
    first_stop = next(grid.points[j] for j in range(grid.n)
                      if pol.stop_set[j][0])
    assert first_stop == static.L_star
    assert pol.lambda_adaptive == static.lambda_star
    assert pol.value == static.guarantee


def test_dp_value_dominates_static():
    tree = binomial_tree(0.6, GRID)
    pol = solve_adaptive_quota(tree, AGENT, PRINCIPAL)
    static = compute_robust(AGENT, PRINCIPAL, 0.6, GRID)
    assert pol.value >= static.guarantee - 1e-12


def test_full_revelation_tree_decouples():
    from robustquota import full_revelation
    tree = full_revelation(0.6, GRID)
    pol = solve_adaptive_quota(tree, AGENT, PRINCIPAL)
    # good branch: maximize U(1,.) + V(1,.) = 2l (monotone) -> stop at l_max;
    # bad branch: U(0,.) + V(0,.) - U(mu0, 0) peaks at 0
    assert pol.stop_set[0][0]            # belief-0 node stops immediately
    assert not pol.stop_set[0][1]
    assert all(not pol.stop_set[j][1] for j in range(GRID.n - 1))


def test_evaluate_on_tree_itself_matches_dp():
    tree = binomial_tree(0.6, GRID)
    pol = solve_adaptive_quota(tree, AGENT, PRINCIPAL)
    val = evaluate_adaptive(pol, tree, AGENT, PRINCIPAL)
    assert val == pytest.approx(pol.value, abs=1e-10)


def test_uninformative_experiment_returns_tree():
    tree = binomial_tree(0.6, GRID)
    ref = refine_process(tree, BinaryExperiment(0.5, 0.5, (1, 2)))
    for a, b in zip(ref.beliefs, tree.beliefs):
        assert np.array_equal(a, b)
    assert ref.parent_map is not None


def test_refinement_is_valid_and_aligned():
    tree = binomial_tree(0.6, GRID)
    ref = refine_process(tree, BinaryExperiment(0.8, 0.3, (0, 3)))
    # constructor validation enforces the martingale; check alignment shape
    assert len(ref.parent_map) == GRID.n
    for j in range(GRID.n):
        assert len(ref.parent_map[j]) == len(ref.beliefs[j])
        assert ref.parent_map[j].max() < len(tree.beliefs[j])


def test_full_revelation_experiment_reveals_state():
    tree = no_learning(0.6, GRID)
    ref = refine_process(tree, BinaryExperiment(1.0, 0.0, (0,)))
    assert sorted(ref.beliefs[0].tolist()) == [0.0, 1.0]
    assert float(ref.root_dist @ ref.beliefs[0]) == pytest.approx(0.6)


def test_refinements_never_undercut_dp(subtests=None):
    tree = binomial_tree(0.6, GRID)
    pol = solve_adaptive_quota(tree, AGENT, PRINCIPAL)
    rng = np.random.default_rng(7)
    for _ in range(20):
        p, q = sorted(rng.uniform(0.1, 0.9, size=2))
        if q - p < 0.05:
            q = min(0.95, q + 0.1)
        levels = tuple(int(x) for x in rng.choice(GRID.n, size=2,
                                                  replace=False))
        ref = refine_process(tree, BinaryExperiment(q, p, levels))
        assert evaluate_adaptive(pol, ref, AGENT, PRINCIPAL) \
            >= pol.value - 1e-8


def test_mismatched_grid_rejected():
    tree = binomial_tree(0.6, GRID)
    pol = solve_adaptive_quota(tree, AGENT, PRINCIPAL)
    other = binomial_tree(0.6, LevelGrid(2.0, 5))
    with pytest.raises(AlignmentError):
        evaluate_adaptive(pol, other, AGENT, PRINCIPAL)
