"""Adaptive quotas on principal belief trees: DP stopping rule, the adaptive
fixed tax, and evaluation against agent processes that refine the tree."""

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import AlignmentError, DomainError, NotARefinementError
from .grid import LevelGrid
from .payoffs import PayoffSpec
from .processes import DiscreteLearningProcess


@dataclass(frozen=True)
class AdaptivePolicy:
    """Per-node stopping region of the planner's DP plus the fixed tax.

    The quota is a stopping region rather than a level function because on a
    tree the binding level is a per-history object.
    """

    tree: DiscreteLearningProcess = field(repr=False)
    stop_set: tuple = field(repr=False)   # per level: boolean array over nodes
    lambda_adaptive: float
    value: float
    mu0: float
    outside: float                        # U(mu0, 0)


def solve_adaptive_quota(tree: DiscreteLearningProcess, agent: PayoffSpec,
                         principal: PayoffSpec,
                         tie_eps: float = 0.0) -> AdaptivePolicy:
    """Backward induction on the planner's tree with stop payoff
    (U(mu, l) - U(mu0, 0)) + V(mu, l); ties go to continuing.

    The tax equals the expected agent surplus at the induced stopping nodes,
    so on a degenerate (one-path) tree this reproduces the static mechanism
    bitwise: same quota level, same tax, same value.
    """
    grid = tree.grid
    n = grid.n
    mu0 = tree.mu0
    a1 = agent.u1(grid.points)
    a0 = agent.u0(grid.points)
    p1 = principal.u1(grid.points)
    p0 = principal.u0(grid.points)
    outside = float(mu0 * a1[0] + (1.0 - mu0) * a0[0])

    def surplus(j):
        mu = tree.beliefs[j]
        U = mu * a1[j] + (1.0 - mu) * a0[j]
        V = mu * p1[j] + (1.0 - mu) * p0[j]
        return (U - outside) + V

    values = [None] * n
    stop_set = [None] * n
    values[n - 1] = surplus(n - 1)
    stop_set[n - 1] = np.ones(len(tree.beliefs[n - 1]), dtype=bool)
    for j in range(n - 2, -1, -1):
        s = surplus(j)
        cont = tree.kernels[j] @ values[j + 1]
        stop_set[j] = s > cont + tie_eps
        values[j] = np.maximum(s, cont)
    value = float(tree.root_dist @ values[0]) if len(tree.root_dist) > 1 \
        else float(tree.root_dist[0] * values[0][0])

    # forward pass: lambda = E[U at stopping] - U(mu0, 0)
    mass = tree.root_dist.copy()
    exp_u = 0.0
    for j in range(n):
        stopped = stop_set[j]
        if stopped.any():
            mu = tree.beliefs[j][stopped]
            exp_u += float((mass[stopped] * (mu * a1[j] + (1.0 - mu) * a0[j])).sum())
        if j < n - 1:
            mass = np.where(stopped, 0.0, mass) @ tree.kernels[j]
    lam = exp_u - outside
    return AdaptivePolicy(tree, tuple(stop_set), lam, value, mu0, outside)


@dataclass(frozen=True)
class BinaryExperiment:
    """A conditionally independent binary signal the agent observes on top of
    the planner's tree: P(up | theta=1) = p_given_good, P(up | theta=0) =
    p_given_bad, observed on arrival at each level in `levels`."""

    p_given_good: float
    p_given_bad: float
    levels: Tuple[int, ...]

    def __post_init__(self):
        if not (0.0 <= self.p_given_bad <= 1.0 and 0.0 <= self.p_given_good <= 1.0):
            raise DomainError("signal probabilities must lie in [0, 1]")
        object.__setattr__(self, "levels", tuple(sorted(set(int(l) for l in self.levels))))

    @property
    def informative(self) -> bool:
        return abs(self.p_given_good - self.p_given_bad) > 1e-15


def _odds(mu):
    return mu / (1.0 - mu)


def refine_process(tree: DiscreteLearningProcess,
                   experiment: BinaryExperiment) -> DiscreteLearningProcess:
    """Agent process that observes the planner's tree plus an extra signal.

    Agent nodes at level j are pairs (planner node i, up-signal count w);
    beliefs combine the planner posterior with the signal likelihood ratio,
    and kernels reweight the planner's transitions by the agent's sharper
    belief (Bayes-consistent, so the martingale property is preserved).
    parent_map records i per agent node for quota alignment.
    """
    if not experiment.informative:
        ident = tuple(np.arange(len(b)) for b in tree.beliefs)
        return DiscreteLearningProcess(tree.grid, tree.beliefs, tree.kernels,
                                       tree.root_dist, tree.mu0, ident)
    p, q = experiment.p_given_good, experiment.p_given_bad
    n = tree.grid.n
    lvls = set(l for l in experiment.levels if 0 <= l < n)
    m_at = np.cumsum([1 if j in lvls else 0 for j in range(n)])  # signals by level j

    def belief(b, w, m):
        if b <= 0.0 or b >= 1.0:
            return b
        num = _odds(b) * p ** w * (1 - p) ** (m - w)
        den = q ** w * (1 - q) ** (m - w)
        if den == 0.0:
            # this signal history is impossible under theta = 0
            return b if num == 0.0 else 1.0
        if num == 0.0:
            return 0.0
        odds = num / den
        return odds / (1.0 + odds) if np.isfinite(odds) else 1.0

    beliefs, parent, sizes = [], [], []
    for j in range(n):
        m = int(m_at[j])
        bj, pj = [], []
        for i, b in enumerate(tree.beliefs[j]):
            for w in range(m + 1):
                bj.append(belief(float(b), w, m))
                pj.append(i)
        beliefs.append(np.array(bj))
        parent.append(np.array(pj, dtype=int))
        sizes.append(m + 1)

    def node(j, i, w):
        return i * sizes[j] + w

    # root: split the root distribution if a signal fires at level 0
    if 0 in lvls:
        root = np.zeros(len(beliefs[0]))
        for i, b in enumerate(tree.beliefs[0]):
            pr_up = b * p + (1 - b) * q
            root[node(0, i, 1)] = tree.root_dist[i] * pr_up
            root[node(0, i, 0)] = tree.root_dist[i] * (1 - pr_up)
    else:
        root = tree.root_dist.copy()

    kernels = []
    for j in range(n - 1):
        fires = (j + 1) in lvls
        K = np.zeros((len(beliefs[j]), len(beliefs[j + 1])))
        base = tree.kernels[j]
        for i, b in enumerate(tree.beliefs[j]):
            for w in range(sizes[j]):
                mu = beliefs[j][node(j, i, w)]
                for ip in np.nonzero(base[i] > 0)[0]:
                    bp = float(tree.beliefs[j + 1][ip])
                    # planner transition probability given each state
                    k1 = base[i, ip] * (bp / b) if b > 0 else base[i, ip]
                    k0 = base[i, ip] * ((1 - bp) / (1 - b)) if b < 1 else base[i, ip]
                    pr1 = mu * k1          # joint with theta = 1
                    pr0 = (1 - mu) * k0
                    if fires:
                        K[node(j, i, w), node(j + 1, ip, w + 1)] += pr1 * p + pr0 * q
                        K[node(j, i, w), node(j + 1, ip, w)] += pr1 * (1 - p) + pr0 * (1 - q)
                    else:
                        K[node(j, i, w), node(j + 1, ip, w)] += pr1 + pr0
        # rows sum to 1 analytically; renormalize away float drift
        rs = K.sum(axis=1)
        if np.any(rs <= 1e-12):
            raise NotARefinementError("refinement produced an empty kernel row")
        K /= rs[:, None]
        kernels.append(K)

    try:
        return DiscreteLearningProcess(tree.grid, tuple(beliefs), tuple(kernels),
                                       root, tree.mu0, tuple(parent))
    except DomainError as e:
        raise NotARefinementError(f"refinement is not Bayes-consistent: {e}")


def evaluate_adaptive(policy: AdaptivePolicy, agent_proc: DiscreteLearningProcess,
                      agent: PayoffSpec, principal: PayoffSpec,
                      tie_eps: float = 1e-9) -> float:
    """Principal's expected value when the agent best-responds to the adaptive
    mechanism: transfer lambda everywhere, development prohibited past the
    planner's per-history stopping node."""
    tree = policy.tree
    grid = agent_proc.grid
    if grid.n != tree.grid.n or abs(grid.l_max - tree.grid.l_max) > 1e-12:
        raise AlignmentError("agent process and planner tree use different grids")
    if agent_proc.parent_map is None:
        if all(len(a) == len(b) for a, b in zip(agent_proc.beliefs, tree.beliefs)):
            parent = tuple(np.arange(len(b)) for b in tree.beliefs)
        else:
            raise AlignmentError("agent process lacks a parent_map onto the tree")
    else:
        parent = agent_proc.parent_map
    for j in range(grid.n):
        if len(parent[j]) != len(agent_proc.beliefs[j]) or \
                np.any(parent[j] >= len(tree.beliefs[j])):
            raise AlignmentError(f"parent_map at level {j} is inconsistent")

    n = grid.n
    mu0 = agent_proc.mu0
    lam = policy.lambda_adaptive
    a1, a0 = agent.u1(grid.points), agent.u0(grid.points)
    p1, p0 = principal.u1(grid.points), principal.u0(grid.points)
    outside = float(mu0 * a1[0] + (1.0 - mu0) * a0[0])

    def stop_u(j):
        mu = agent_proc.beliefs[j]
        return mu * a1[j] + (1.0 - mu) * a0[j] - lam

    values = [None] * n
    stops = [None] * n
    forced = [np.asarray(policy.stop_set[j])[parent[j]] for j in range(n)]
    values[n - 1] = stop_u(n - 1)
    stops[n - 1] = np.ones(len(agent_proc.beliefs[n - 1]), dtype=bool)
    for j in range(n - 2, -1, -1):
        s = stop_u(j)
        cont = agent_proc.kernels[j] @ values[j + 1]
        stop = forced[j] | (s > cont + tie_eps)
        values[j] = np.where(forced[j], s, np.maximum(s, cont))
        stops[j] = stop

    root_value = float(agent_proc.root_dist @ values[0])
    if root_value < outside - 1e-9:
        return float(mu0 * p1[0] + (1.0 - mu0) * p0[0])

    mass = agent_proc.root_dist.copy()
    total = 0.0
    for j in range(n):
        st = stops[j]
        if st.any():
            mu = agent_proc.beliefs[j][st]
            total += float((mass[st] * (mu * p1[j] + (1.0 - mu) * p0[j] + lam)).sum())
        if j < n - 1:
            mass = np.where(st, 0.0, mass) @ agent_proc.kernels[j]
    return total
