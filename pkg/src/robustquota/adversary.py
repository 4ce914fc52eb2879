"""Worst-case learning: the bad-news LP, the binding-obedience construction,
the dual certificate, a brute-force tree oracle, and payoff gaps."""

import itertools
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .badnews import (BadNewsProcess, effective_end, obedience_check,
                      obedience_slacks)
from .checks import one_shot_levels, risk_ratio_condition
from .errors import (BudgetExceededError, ConditionViolatedError, DomainError,
                     InfeasibleLPError)
from .grid import LevelGrid, belief_grid
from .mechanisms import Mechanism, adjusted_profiles
from .payoffs import PayoffSpec
from .simplex import solve_lp


def principal_prefers_earlier(agent: PayoffSpec, principal: PayoffSpec,
                              m: Mechanism, grid: LevelGrid,
                              n_mu: int = 201) -> bool:
    """Scan l_hat_{V^phi} <= l_hat_{U^phi}, strict wherever the agent's
    one-shot level is interior (boundary-clamped beliefs are exempt)."""
    mus = belief_grid(n_mu)
    lu = one_shot_levels(agent, mus, grid, m, side="agent")
    lv = one_shot_levels(principal, mus, grid, m, side="principal")
    end_level = grid.points[effective_end(m, grid)]
    if np.any(lv > lu + 1e-12):
        return False
    interior = (lu > 1e-12) & (lu < end_level - 1e-12)
    return bool(np.all(lv[interior] < lu[interior] - 1e-15))


def stop_rule_at_zero(a0: np.ndarray) -> np.ndarray:
    """stop_idx[j] = largest argmax of U^phi(0, .) over levels >= j."""
    n = len(a0)
    out = np.empty(n, dtype=int)
    best_val, best_idx = -np.inf, n - 1
    for j in range(n - 1, -1, -1):
        if a0[j] > best_val:
            best_val, best_idx = a0[j], j
        out[j] = best_idx
    return out


@dataclass(frozen=True)
class BadNewsLPResult:
    bn: BadNewsProcess
    value: float
    premise_ok: bool            # False => bound valid within the bad-news class only
    iterations: int
    binding: np.ndarray = field(repr=False)  # binding obedience rows at the optimum
    objective: np.ndarray = field(repr=False)

    def diagnostics(self) -> dict:
        return {"objective": float(self.value), "iterations": int(self.iterations),
                "binding": [int(i) for i in self.binding],
                "premise_ok": self.premise_ok}


def _lp_data(agent: PayoffSpec, principal: PayoffSpec, m: Mechanism,
             grid: LevelGrid, mu0: float):
    end = effective_end(m, grid)
    a1, a0, _ = adjusted_profiles(agent, m, "agent", grid)
    p1, p0, _ = adjusted_profiles(principal, m, "principal", grid)
    a1, a0, p1, p0 = a1[:end + 1], a0[:end + 1], p1[:end + 1], p0[:end + 1]
    stop_idx = stop_rule_at_zero(a0)
    c = p0[stop_idx]
    b_ub = mu0 * (a1[-1] - a1)
    A_ub = np.triu(a0[:, None] - a0[None, :])
    return end, a1, a0, p1, c, stop_idx, A_ub, b_ub


def solve_badnews_lp(agent: PayoffSpec, principal: PayoffSpec, m: Mechanism,
                     grid: LevelGrid, mu0: float, solver: str = "auto",
                     enforce_participation: bool = False) -> BadNewsLPResult:
    """Minimize the principal's value over obedient bad-news processes.

    Objective: mu0 V^phi(1, l_end) + sum_j V^phi(0, stop_level(l_j)) g_j over
    arrival increments g >= 0 with total mass 1-mu0, subject to the
    upper-triangular obedience rows.  Quota mechanisms truncate the grid at
    the last allowed level (mass is forced to stop there).
    """
    if not 0.0 < mu0 < 1.0:
        raise DomainError("worst-case search needs an interior prior")
    end, a1, a0, p1, c, stop_idx, A_ub, b_ub = _lp_data(agent, principal, m,
                                                        grid, mu0)
    premise_ok = principal_prefers_earlier(agent, principal, m, grid)
    n = end + 1
    A_eq = [np.ones(n)]
    b_eq = [1.0 - mu0]
    rows_ub = [A_ub]
    rhs_ub = [b_ub]
    if enforce_participation:
        outside = float(agent.indirect(mu0, 0.0))
        rows_ub.append(-a0[stop_idx][None, :])
        rhs_ub.append(np.array([mu0 * a1[-1] - outside]))
    A_ub_full = np.vstack(rows_ub)
    b_ub_full = np.concatenate(rhs_ub)

    if solver == "auto":
        solver = "highs" if n > 600 else "simplex"
    if solver == "simplex":
        res = solve_lp(c, A_ub_full, b_ub_full, A_eq, b_eq)
        g, iters = res.x, res.n_iter
    elif solver == "highs":
        from scipy.optimize import linprog
        A_hi, b_hi, c_hi = A_ub_full, b_ub_full, c
        big = max(float(np.abs(A_hi).max()), float(np.abs(c).max()))
        if big > 1e15:
            # CARA payoffs on long grids reach ~e^48, past HiGHS's infinity
            # threshold; row and objective scaling keep the model in range
            # (accuracy at such ranges is limited either way -- see the
            # obedience warning below)
            row_scale = np.maximum.reduce([np.abs(A_hi).max(axis=1),
                                           np.abs(b_hi), np.ones(len(b_hi))])
            A_hi = A_hi / row_scale[:, None]
            b_hi = b_hi / row_scale
            c_hi = c / max(float(np.abs(c).max()), 1.0)
        res = linprog(c_hi, A_ub=A_hi, b_ub=b_hi, A_eq=A_eq, b_eq=b_eq,
                      bounds=(0, None), method="highs")
        if res.status == 2:
            raise InfeasibleLPError(f"infeasible bad-news LP: {res.message}")
        if not res.success:
            raise InfeasibleLPError(f"LP solver failed: {res.message}")
        g, iters = res.x, int(res.nit)
    else:
        raise DomainError(f"unknown solver {solver!r}")

    g = np.clip(g, 0.0, None)
    total = g.sum()
    if total > 0:
        g *= (1.0 - mu0) / total
    G = np.cumsum(g)
    G[-1] = 1.0 - mu0
    bn = BadNewsProcess(grid, G, mu0, end)
    value = float(mu0 * p1[-1] + c @ g)
    slacks = obedience_slacks(g, a1, a0, mu0)
    scale = max(1.0, float(np.abs(a0).max()), float(np.abs(a1).max()))
    if float(-slacks.min()) > 1e-6 * scale:
        warnings.warn("LP solution violates obedience beyond tolerance; the "
                      "value is unreliable at this payoff range (consider the "
                      "indifference construction)", RuntimeWarning)
    binding = np.nonzero(np.abs(slacks) <= 1e-7 * scale)[0]
    return BadNewsLPResult(bn, value, premise_ok, iters, binding, c)


def badnews_value(bn: BadNewsProcess, agent: PayoffSpec, principal: PayoffSpec,
                  m: Mechanism) -> float:
    """Principal value of a bad-news process under the belief-0 stop rule."""
    grid = bn.grid
    a1, a0, _ = adjusted_profiles(agent, m, "agent", grid)
    p1, p0, _ = adjusted_profiles(principal, m, "principal", grid)
    e = bn.end
    stop_idx = stop_rule_at_zero(a0[:e + 1])
    g = bn.increments()
    return float(bn.mu0 * p1[e] + p0[:e + 1][stop_idx] @ g)


@dataclass(frozen=True)
class IndifferenceResult:
    bn: BadNewsProcess
    lbar: float                 # support start L_low
    lbar_index: int
    used_lp_fallback: bool


def indifference_G(agent: PayoffSpec, m: Mechanism, grid: LevelGrid,
                   mu0: float, principal: Optional[PayoffSpec] = None) -> IndifferenceResult:
    """Construct the bad-news process with binding obedience on [L_low, l_max).

    Solves the triangular system top-down: the row at level j pins the
    arrival increment at level j+1.  Mass accumulates going down; the level
    where it reaches 1-mu0 is L_low.  Falls back to the LP when increments go
    negative or the result is disobedient (requires `principal` for values).
    """
    if not 0.0 < mu0 < 1.0:
        raise DomainError("construction needs an interior prior")
    end = effective_end(m, grid)
    a1, a0, _ = adjusted_profiles(agent, m, "agent", grid)
    a1, a0 = a1[:end + 1], a0[:end + 1]
    target = 1.0 - mu0
    scale = max(1.0, float(np.abs(a0).max()))
    b = mu0 * (a1[-1] - a1)

    g = np.zeros(end + 1)
    A = 0.0   # mass strictly above the current row
    C = 0.0   # payoff-weighted mass strictly above
    ok = True
    for j in range(end - 1, -1, -1):
        denom = a0[j] - a0[j + 1]
        if denom <= 1e-15 * scale:
            ok = False
            break
        gnext = (b[j] - a0[j] * A + C) / denom
        if gnext < -1e-9 * scale:
            ok = False
            break
        gnext = max(gnext, 0.0)
        if A + gnext >= target:
            g[j + 1] = target - A
            A = target
            break
        g[j + 1] = gnext
        A += gnext
        C += a0[j + 1] * gnext
    if ok and A < target:
        g[0] = target - A

    if ok:
        G = np.cumsum(g)
        G[-1] = target
        bn = BadNewsProcess(grid, G, mu0, end)
        rep = obedience_check(bn, agent, m, tol=1e-8)
        if rep.ok:
            pos = np.nonzero(g > 1e-15)[0]
            jbar = int(pos[0]) if pos.size else end
            return IndifferenceResult(bn, float(grid.points[jbar]), jbar, False)

    warnings.warn("indifference construction infeasible; falling back to the "
                  "bad-news LP", RuntimeWarning)
    if principal is None:
        raise ConditionViolatedError(
            "indifference construction infeasible and no principal payoff "
            "was given for the LP fallback")
    lp = solve_badnews_lp(agent, principal, m, grid, mu0)
    g = lp.bn.increments()
    pos = np.nonzero(g > 1e-15)[0]
    jbar = int(pos[0]) if pos.size else end
    return IndifferenceResult(lp.bn, float(grid.points[jbar]), jbar, True)


@dataclass(frozen=True)
class DualCertificate:
    Lambda: np.ndarray = field(repr=False)
    lbar: float
    dual_value: float           # -sum g_bar dLambda, the Stieltjes part
    dual_bound: float           # full lower bound on the LP optimum
    primal_value: float
    gap: float                  # primal - dual_bound >= 0 (weak duality)
    gbar: np.ndarray = field(repr=False)  # mu0 (U^phi(1,l_end) - U^phi(1,l))
    comp_slack_max: float       # worst |slack| on levels carrying mass

    def to_dict(self):
        return {"lbar": self.lbar, "dual_value": self.dual_value,
                "dual_bound": self.dual_bound, "primal_value": self.primal_value,
                "gap": self.gap, "comp_slack_max": self.comp_slack_max}


def dual_certificate(agent: PayoffSpec, principal: PayoffSpec, m: Mechanism,
                     grid: LevelGrid, mu0: float) -> DualCertificate:
    """Build the two-branch multiplier Lambda* and check weak duality.

    Lambda* is constant at V^phi(0,lbar)/U^phi(0,lbar) below lbar and equals
    the bad-state marginal-payoff ratio (forward differences, which make the
    discrete telescoping exact) above it.  Lambda* supplies the obedience-row
    multipliers; the mass-row multiplier is the exact minimum of the dual
    feasibility slack, so dual_bound <= LP optimum holds by construction
    whenever Lambda* is nonnegative and nondecreasing.
    """
    ratio = risk_ratio_condition(agent, principal, m, grid)
    if not ratio.nondecreasing:
        raise ConditionViolatedError(
            f"marginal-ratio condition fails at {ratio.witness}")
    ind = indifference_G(agent, m, grid, mu0, principal)
    jbar = ind.lbar_index
    end, a1, a0, p1, c, stop_idx, _, _ = _lp_data(agent, principal, m, grid,
                                                  mu0)

    p0 = adjusted_profiles(principal, m, "principal", grid)[1][:end + 1]

    dU = np.diff(a0)
    if np.any(np.abs(dU) <= 1e-15 * max(1.0, float(np.abs(a0).max()))):
        raise ConditionViolatedError("flat agent bad-state payoff step")
    fwd = np.diff(p0) / dU
    kappa = float(p0[jbar] / a0[jbar])
    Lambda = np.empty(end + 1)
    Lambda[:jbar] = kappa
    Lambda[jbar:end] = fwd[jbar:]
    Lambda[end] = Lambda[end - 1] if end > 0 else kappa

    scale = max(1.0, float(np.abs(Lambda).max()))
    if np.any(np.diff(Lambda) < -1e-9 * scale) or Lambda[0] < -1e-9 * scale:
        raise ConditionViolatedError("Lambda* is not nonnegative nondecreasing")
    y = np.diff(Lambda, prepend=0.0)
    y = np.clip(y, 0.0, None)

    # dual feasibility slack per column: c_k + sum_{j<=k} y_j (U0_j - U0_k)
    W = np.cumsum(y * a0)
    M = np.cumsum(y)
    lhs = c + W - a0 * M
    t = float(lhs.min())

    gbar = mu0 * (a1[-1] - a1)
    dual_value = float(-(y @ gbar))
    dual_bound = float(mu0 * p1[-1] + (1.0 - mu0) * t + dual_value)

    lp = solve_badnews_lp(agent, principal, m, grid, mu0)
    slacks = obedience_slacks(lp.bn.increments(), a1, a0, mu0)
    carrying = lp.bn.increments() > 1e-12
    comp = float(np.abs(slacks[carrying]).max()) if carrying.any() else 0.0
    return DualCertificate(Lambda, ind.lbar, dual_value, dual_bound,
                           lp.value, lp.value - dual_bound, gbar, comp)


@dataclass(frozen=True)
class OracleResult:
    value: float
    #: rows (level, belief, mass) of the worst process's stopping distribution
    stop_mass: tuple
    n_lps: int
    pattern: tuple = field(repr=False)

    def pre_terminal_offzero_mass(self, l_end: float) -> float:
        return sum(m for (l, b, m) in self.stop_mass
                   if l < l_end - 1e-12 and b > 1e-9)


def tree_oracle_worst_case(agent: PayoffSpec, principal: PayoffSpec, m: Mechanism,
                           small_grid: LevelGrid, belief_support: Sequence[float],
                           mu0: float, pattern_budget: int = 4096) -> OracleResult:
    """Exhaustive worst case over layered belief trees on a fixed support.

    Enumerates per-(level, belief) stop/continue patterns; for each pattern
    the kernel freedom is an LP over truncated-path probabilities with
    martingale, obedience, and participation rows.  Instances above the
    budget are refused.
    """
    B = np.asarray(sorted(set(float(b) for b in belief_support)))
    if np.any(B < 0) or np.any(B > 1):
        raise DomainError("belief support must lie in [0, 1]")
    if small_grid.n > 4 or len(B) > 5:
        raise BudgetExceededError(
            f"instance too large: {small_grid.n} levels, {len(B)} beliefs")
    end = effective_end(m, small_grid)
    a1, a0, _ = adjusted_profiles(agent, m, "agent", small_grid)
    p1, p0, _ = adjusted_profiles(principal, m, "principal", small_grid)
    nb = len(B)

    U = np.outer(B, a1[:end + 1]) + np.outer(1 - B, a0[:end + 1])  # (belief, level)
    V = np.outer(B, p1[:end + 1]) + np.outer(1 - B, p0[:end + 1])
    outside = float(agent.indirect(mu0, 0.0))
    scale = max(1.0, float(np.abs(U).max()))

    # a stop mark at (j, b) is only consistent with optimal play when stopping
    # beats freezing the belief and developing to any later level
    stop_valid = np.ones((end, nb), dtype=bool)
    for j in range(end):
        stop_valid[j] = U[:, j] >= U[:, j + 1:].max(axis=1) - 1e-12 * scale

    choices = []
    for j in range(end):
        for bi in range(nb):
            choices.append((True, False) if stop_valid[j, bi] else (False,))
    n_patterns = int(np.prod([len(c) for c in choices])) if choices else 1
    if n_patterns > pattern_budget:
        raise BudgetExceededError(
            f"{n_patterns} stop/continue patterns exceed budget {pattern_budget}")

    best = None
    n_lps = 0
    for flat in itertools.product(*choices):
        sigma = np.zeros((end, nb), dtype=bool)
        if end:
            sigma[:] = np.array(flat, dtype=bool).reshape(end, nb)

        # enumerate truncated histories
        paths = []          # terminal histories: tuple of belief indices
        internal = []       # (history, level) pairs that continue
        stack = [(bi,) for bi in range(nb)]
        while stack:
            h = stack.pop()
            j = len(h) - 1
            if j == end or sigma[j][h[-1]]:
                paths.append(h)
            else:
                internal.append(h)
                stack.extend(h + (bi,) for bi in range(nb))
        nv = len(paths)
        path_index = {h: i for i, h in enumerate(paths)}

        def descendants(h):
            return [i for i, p in enumerate(paths) if p[:len(h)] == h]

        stop_u = np.array([U[h[-1], len(h) - 1] for h in paths])
        stop_v = np.array([V[h[-1], len(h) - 1] for h in paths])

        A_eq = [np.ones(nv)]
        b_eq = [1.0]
        row = np.array([B[h[0]] for h in paths])
        A_eq.append(row)
        b_eq.append(mu0)
        A_ub = []
        b_ub = []
        for h in internal:
            j = len(h) - 1
            desc = descendants(h)
            mart = np.zeros(nv)
            obey = np.zeros(nv)
            for i in desc:
                mart[i] = B[paths[i][j + 1]] - B[h[-1]]
                obey[i] = U[h[-1], j] - stop_u[i]
            A_eq.append(mart)
            b_eq.append(0.0)
            A_ub.append(obey)  # <= 0: continuing must weakly beat stopping
            b_ub.append(0.0)
        A_ub.append(-stop_u)
        b_ub.append(-outside)

        try:
            res = solve_lp(stop_v, np.array(A_ub), np.array(b_ub),
                           np.array(A_eq), np.array(b_eq))
        except InfeasibleLPError:
            continue
        finally:
            n_lps += 1
        if best is None or res.fun < best[0] - 0:
            q = res.x
            rows = tuple((float(small_grid.points[len(h) - 1]), float(B[h[-1]]),
                          float(q[i]))
                         for i, h in enumerate(paths) if q[i] > 1e-12)
            best = (res.fun, rows, flat)

    if best is None:
        raise InfeasibleLPError("no stop/continue pattern admits a feasible tree")
    return OracleResult(float(best[0]), best[1], n_lps, best[2])


@dataclass(frozen=True)
class GapResult:
    delta: float
    guarantee: float
    worst_value: float
    route: str                  # "badnews_lp" or "tree_oracle"
    premise_ok: bool


def payoff_gap(m: Mechanism, agent: PayoffSpec, principal: PayoffSpec,
               grid: LevelGrid, mu0: float,
               oracle_beliefs: Optional[Sequence[float]] = None) -> GapResult:
    """Delta(phi) = ADV guarantee minus the worst-case value of mechanism m."""
    from .robust import compute_robust
    guarantee = compute_robust(agent, principal, mu0, grid).guarantee
    lp = solve_badnews_lp(agent, principal, m, grid, mu0)
    if lp.premise_ok:
        return GapResult(guarantee - lp.value, guarantee, lp.value,
                         "badnews_lp", True)
    # earlier-stopping premise failed: bound via the small tree oracle
    small = LevelGrid(grid.l_max, min(grid.n, 4))
    if oracle_beliefs is None:
        lam = lp.bn.cont_belief()
        idx = np.linspace(0, len(lam) - 1, 3).astype(int)
        oracle_beliefs = sorted({0.0, *(float(lam[i]) for i in idx)})[:5]
    oracle = tree_oracle_worst_case(agent, principal, m, small,
                                    oracle_beliefs, mu0)
    worst = min(lp.value, oracle.value)
    return GapResult(guarantee - worst, guarantee, worst, "tree_oracle", False)
