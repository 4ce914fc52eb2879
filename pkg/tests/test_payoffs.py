import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robustquota import (CARA, CRRA, DomainError, LevelGrid, Quadratic,
                         Tabulated, cara_pair, indirect_utility,
                         liability_transform, payoff_from_dict, quadratic_pair)


def test_quadratic_closed_form():
    p = Quadratic(1.0, 1.0, 1.0)
    assert p.u(1, 2.0) == 2.0
    assert p.u(0, 2.0) == -6.0  # -l - l^2


def test_quadratic_pair_agent_is_risk_neutral():
    agent, principal = quadratic_pair(1.0, 1.0, 1.0)
    # agent indirect utility collapses to (2 mu - 1) l
    for mu in (0.0, 0.3, 0.6, 1.0):
        for l in (0.0, 0.5, 2.0):
            assert indirect_utility(agent, mu, l) == pytest.approx((2 * mu - 1) * l)
    assert principal.quad == 1.0


def test_cara_closed_form():
    p = CARA(2.0)
    assert p.u(1, 1.0) == pytest.approx(-np.exp(-2.0))
    assert p.u(0, 1.0) == pytest.approx(-np.exp(2.0))


def test_crra_floors_the_origin():
    p = CRRA(2.0, eps=1e-6)
    assert np.isfinite(p.u(0, 0.0))
    assert p.singular_at_zero


def test_crra_rejects_log_case():
    with pytest.raises(DomainError):
        CRRA(1.0)


def test_indirect_utility_domain_checks():
    g = LevelGrid(1.0, 11)
    with pytest.raises(DomainError):
        indirect_utility(CARA(1.0), 1.5, 0.5, g)
    with pytest.raises(DomainError):
        indirect_utility(CARA(1.0), 0.5, 2.0, g)


def test_liability_transform_caps_the_gap():
    g = LevelGrid(1.0, 11)
    agent, principal = quadratic_pair(1.0, 1.0, 1.0)
    t = liability_transform(agent, 0.25, principal, g)
    pts = g.points
    gap = np.clip(agent.u0(pts) - principal.u0(pts), 0.0, 0.25)
    assert np.allclose(t.u0(pts), agent.u0(pts) - gap)
    assert np.allclose(t.u1(pts), agent.u1(pts))


def test_liability_transform_zero_cap_is_identity():
    g = LevelGrid(1.0, 11)
    agent, principal = cara_pair(1.0, 3.0)
    t = liability_transform(agent, 0.0, principal, g)
    assert np.allclose(t.u0(g.points), agent.u0(g.points))


@pytest.mark.parametrize("spec", [Quadratic(1.0, 2.0, 0.5), CARA(1.5),
                                  CRRA(2.0)])
def test_dict_roundtrip(spec):
    again = payoff_from_dict(spec.to_dict())
    pts = np.linspace(0.01, 1.0, 7)
    assert np.allclose(spec.u1(pts), again.u1(pts))
    assert np.allclose(spec.u0(pts), again.u0(pts))


def test_tabulated_roundtrip_needs_grid():
    g = LevelGrid(1.0, 5)
    t = Tabulated(g, tuple(g.points), tuple(-g.points))
    with pytest.raises(DomainError):
        payoff_from_dict(t.to_dict())
    again = payoff_from_dict(t.to_dict(), g)
    assert np.allclose(again.u1(g.points), g.points)


@given(mu=st.floats(0.0, 1.0), l=st.floats(0.0, 2.0),
       c=st.floats(-5.0, 5.0))
@settings(max_examples=50, deadline=None)
def test_indirect_is_affine_in_shift(mu, l, c):
    """Adding a constant to both states shifts U(mu, l) by that constant.

    Both sides use tabulated payoffs so off-grid interpolation cancels."""
    g = LevelGrid(2.0, 5)
    cara = CARA(1.0)
    base = Tabulated(g, tuple(cara.u1(g.points)), tuple(cara.u0(g.points)))
    shifted = Tabulated(g, tuple(cara.u1(g.points) + c),
                        tuple(cara.u0(g.points) + c))
    assert indirect_utility(shifted, mu, l, g) == pytest.approx(
        indirect_utility(base, mu, l, g) + c, abs=1e-12)
