"""Agent optimal stopping by backward induction, principal evaluation, and
seeded path simulation."""

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .errors import DomainError, EmptyMechanismError, RobustQuotaError
from .mechanisms import Mechanism, adjusted_profiles
from .payoffs import PayoffSpec
from .processes import DiscreteLearningProcess


@dataclass(frozen=True)
class StoppingSolution:
    """Backward-induction solution of the agent's problem.

    `values`/`stop_set` run over levels 0..end (the last allowed level under
    the mechanism's quota); `joint` is the induced distribution over
    (stopping belief, stopping level) as parallel arrays.
    """

    proc: DiscreteLearningProcess = field(repr=False)
    end: int
    values: tuple = field(repr=False)
    stop_set: tuple = field(repr=False)
    joint_belief: np.ndarray
    joint_level: np.ndarray
    joint_mass: np.ndarray
    root_value: float
    outside_option: float
    participation: bool
    mu0: float


def solve_stopping(proc: DiscreteLearningProcess, agent: PayoffSpec, m: Mechanism,
                   tie_eps: float = 1e-9,
                   participation_tol: float = 1e-9) -> StoppingSolution:
    """Solve sup over stopping times of E[U^phi] on the process tree.

    Indifference (within tie_eps) goes to continuing; levels past the quota
    are excluded from the continuation max, so the last allowed level is a
    forced stop.  Participation compares the root value to U(mu0, 0).
    """
    grid = proc.grid
    a1, a0, proh = adjusted_profiles(agent, m, "agent", grid)
    allowed = ~proh
    if not allowed.any():
        raise EmptyMechanismError("all levels prohibited")
    end = int(np.nonzero(allowed)[0][-1])
    if not allowed[:end + 1].all():
        raise DomainError("prohibited set must be upward-closed")

    stop_payoff = [proc.beliefs[j] * a1[j] + (1.0 - proc.beliefs[j]) * a0[j]
                   for j in range(end + 1)]

    values: List[np.ndarray] = [None] * (end + 1)
    stop_set: List[np.ndarray] = [None] * (end + 1)
    values[end] = stop_payoff[end].copy()
    stop_set[end] = np.ones(len(proc.beliefs[end]), dtype=bool)
    for j in range(end - 1, -1, -1):
        cont = proc.kernels[j] @ values[j + 1]
        stop = stop_payoff[j] > cont + tie_eps
        values[j] = np.maximum(stop_payoff[j], cont)
        stop_set[j] = stop

    root_value = float(proc.root_dist @ values[0])
    outside = float(agent.indirect(proc.mu0, 0.0))
    participation = root_value >= outside - participation_tol

    # forward pass: mass stopped at each (node, level)
    jb, jl, jm = [], [], []
    mass = proc.root_dist.copy()
    for j in range(end + 1):
        stopped = stop_set[j]
        if stopped.any():
            for i in np.nonzero(stopped & (mass > 0))[0]:
                jb.append(float(proc.beliefs[j][i]))
                jl.append(float(grid.points[j]))
                jm.append(float(mass[i]))
        if j < end:
            flowing = np.where(stopped, 0.0, mass)
            mass = flowing @ proc.kernels[j]

    joint_belief = np.array(jb)
    joint_level = np.array(jl)
    joint_mass = np.array(jm)
    total = joint_mass.sum()
    if abs(total - 1.0) > 1e-12:
        raise RobustQuotaError(f"joint stopping mass {total} != 1")

    return StoppingSolution(proc, end, tuple(values), tuple(stop_set),
                            joint_belief, joint_level, joint_mass,
                            root_value, outside, participation, proc.mu0)


def agent_value(sol: StoppingSolution) -> float:
    return sol.root_value if sol.participation else sol.outside_option


def principal_value(sol: StoppingSolution, principal: PayoffSpec, m: Mechanism) -> float:
    """E[V^phi] over the stopping distribution; the outside option V(mu0, 0)
    when the agent does not participate."""
    grid = sol.proc.grid
    if not sol.participation:
        return float(principal.indirect(sol.mu0, 0.0))
    p1, p0, proh = adjusted_profiles(principal, m, "principal", grid)
    idx = np.array([grid.index_of(l) for l in sol.joint_level], dtype=int)
    if proh[idx].any():
        raise RobustQuotaError("stopping mass on a prohibited level")
    vals = sol.joint_belief * p1[idx] + (1.0 - sol.joint_belief) * p0[idx]
    return float(vals @ sol.joint_mass)


def _deterministic_outcome(proc, sol):
    """(belief, level) when every path is the same (one-hot kernels, atom root)."""
    if len(proc.root_dist) != 1:
        root_one_hot = np.count_nonzero(proc.root_dist > 0) == 1
        if not root_one_hot:
            return None
        node = int(np.argmax(proc.root_dist))
    else:
        node = 0
    for j in range(sol.end + 1):
        if sol.stop_set[j][node]:
            return float(proc.beliefs[j][node]), float(proc.grid.points[j])
        row = proc.kernels[j][node]
        if np.count_nonzero(row > 0) != 1:
            return None
        node = int(np.argmax(row))
    raise AssertionError("unreachable: forced stop at the end")


def simulate(proc: DiscreteLearningProcess, sol: StoppingSolution, n_paths: int,
             seed: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Monte Carlo draw of (stopping belief, stopping level) pairs.

    Each path uses its own counter-based RNG stream keyed by (seed, path), so
    the sample is reproducible and independent of any parallel scheduling.
    Returns aggregated (stop_level, stop_belief, mass) arrays.
    """
    if n_paths < 1:
        raise DomainError("n_paths must be >= 1")
    det = _deterministic_outcome(proc, sol)
    if det is not None:
        b, l = det
        return np.array([l]), np.array([b]), np.array([1.0])

    root_cdf = np.cumsum(proc.root_dist)
    kernel_cdfs = [np.cumsum(k, axis=1) for k in proc.kernels]
    counts = {}
    for path in range(n_paths):
        rng = np.random.Generator(np.random.Philox(key=np.array([seed, path],
                                                                dtype=np.uint64)))
        node = int(np.searchsorted(root_cdf, rng.random()))
        j = 0
        while not sol.stop_set[j][node]:
            node = int(np.searchsorted(kernel_cdfs[j][node], rng.random()))
            j += 1
        key = (float(proc.grid.points[j]), float(proc.beliefs[j][node]))
        counts[key] = counts.get(key, 0) + 1

    keys = sorted(counts)
    levels = np.array([k[0] for k in keys])
    bels = np.array([k[1] for k in keys])
    mass = np.array([counts[k] / n_paths for k in keys])
    return levels, bels, mass
