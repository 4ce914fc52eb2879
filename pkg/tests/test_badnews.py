import numpy as np
import pytest

from robustquota import (BadNewsProcess, DomainError, FixedTaxHardQuota,
                         LevelGrid, Zero, cara_pair, effective_end,
                         obedience_check, solve_stopping)
from robustquota.adversary import indifference_G

GRID = LevelGrid(2.0, 41)


def _uniform_bn(mu0=0.5, grid=GRID):
    G = np.linspace(0.0, 1.0 - mu0, grid.n)
    return BadNewsProcess(grid, G, mu0)


def test_cont_belief_martingale_identity():
    bn = _uniform_bn()
    lam = bn.cont_belief()
    assert np.allclose((1.0 - bn.G) * lam, bn.mu0)
    assert lam[0] == pytest.approx(0.5)
    assert lam[-1] == pytest.approx(1.0)


def test_g_must_be_nondecreasing_with_right_total():
    with pytest.raises(DomainError):
        BadNewsProcess(GRID, np.linspace(0.5, 0.0, GRID.n), 0.5)
    with pytest.raises(DomainError):
        BadNewsProcess(GRID, np.linspace(0.0, 0.3, GRID.n), 0.5)


def test_to_process_reproduces_beliefs_and_mass():
    bn = _uniform_bn()
    proc = bn.to_process()
    lam = bn.cont_belief()
    for j in range(GRID.n):
        assert proc.beliefs[j][1] == pytest.approx(lam[j])
    # surviving mass after j steps equals 1 - G_j
    mass = proc.root_dist.copy()
    for j in range(GRID.n - 1):
        mass = mass @ proc.kernels[j]
        assert mass[1] == pytest.approx(1.0 - bn.G[j + 1])


def test_effective_end_with_quota():
    m = FixedTaxHardQuota(0.0, 1.0)
    assert GRID.points[effective_end(m, GRID)] == pytest.approx(1.0)
    assert effective_end(Zero(), GRID) == GRID.n - 1


def test_indifference_construction_is_obedient():
    agent, principal = cara_pair(1.0, 3.0)
    ind = indifference_G(agent, Zero(), GRID, 0.5, principal)
    rep = obedience_check(ind.bn, agent, Zero())
    assert rep.ok
    # every level in the support should be (weakly) binding
    assert rep.max_violation == pytest.approx(0.0, abs=1e-9)


def test_agent_stopping_on_badnews_tree_follows_arrivals():
    """On the compact two-node tree the agent's bad-news branch stops
    immediately (belief 0 under a CARA agent never continues)."""
    agent, principal = cara_pair(1.0, 3.0)
    ind = indifference_G(agent, Zero(), GRID, 0.5, principal)
    sol = solve_stopping(ind.bn.to_process(), agent, Zero())
    at_zero = sol.joint_belief <= 1e-12
    # belief-0 mass stops where it arrives: total arrival mass 1 - mu0
    assert sol.joint_mass[at_zero].sum() == pytest.approx(0.5, abs=1e-9)
