"""Discrete learning processes: belief martingales on the level grid.

A process is a layered DAG: one finite belief support per grid level, a
row-stochastic kernel between consecutive levels, and a root distribution
over the level-0 support whose mean is the prior.
"""

import json
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import DomainError
from .grid import LevelGrid


@dataclass(frozen=True)
class DiscreteLearningProcess:
    grid: LevelGrid
    beliefs: tuple      # per level: np.ndarray of node beliefs
    kernels: tuple      # per step: (m_j, m_{j+1}) row-stochastic matrix
    root_dist: np.ndarray
    mu0: float
    #: optional per-level map from this process's nodes to the nodes of a
    #: coarser process it refines (used by the adaptive module)
    parent_map: Optional[tuple] = field(default=None, compare=False)

    def __post_init__(self):
        beliefs = tuple(np.asarray(b, dtype=float) for b in self.beliefs)
        kernels = tuple(np.asarray(k, dtype=float) for k in self.kernels)
        object.__setattr__(self, "beliefs", beliefs)
        object.__setattr__(self, "kernels", kernels)
        object.__setattr__(self, "root_dist", np.asarray(self.root_dist, dtype=float))
        self._validate()

    def _validate(self):
        n = self.grid.n
        if len(self.beliefs) != n or len(self.kernels) != n - 1:
            raise DomainError("process must have one support per level and one "
                              "kernel per step")
        if not 0.0 <= self.mu0 <= 1.0:
            raise DomainError(f"prior {self.mu0} outside [0, 1]")
        for b in self.beliefs:
            if b.ndim != 1 or np.any(b < -1e-12) or np.any(b > 1 + 1e-12):
                raise DomainError("node beliefs must lie in [0, 1]")
        if self.root_dist.shape != self.beliefs[0].shape:
            raise DomainError("root distribution must match the level-0 support")
        if np.any(self.root_dist < -1e-12) or abs(self.root_dist.sum() - 1.0) > 1e-12:
            raise DomainError("root distribution must be a probability vector")
        root_mean = float(self.root_dist @ self.beliefs[0])
        if abs(root_mean - self.mu0) > 1e-10:
            raise DomainError(f"root mean belief {root_mean} != prior {self.mu0}")
        for j, k in enumerate(self.kernels):
            if k.shape != (len(self.beliefs[j]), len(self.beliefs[j + 1])):
                raise DomainError(f"kernel {j} has wrong shape")
            if np.any(k < -1e-12):
                raise DomainError(f"kernel {j} has negative entries")
            if np.any(np.abs(k.sum(axis=1) - 1.0) > 1e-12):
                raise DomainError(f"kernel {j} rows must sum to 1")
            drift = k @ self.beliefs[j + 1] - self.beliefs[j]
            if np.any(np.abs(drift) > 1e-10):
                raise DomainError(f"martingale violated at level {j}: "
                                  f"max drift {np.abs(drift).max():.3e}")
        if self.parent_map is not None and len(self.parent_map) != n:
            raise DomainError("parent_map must have one entry per level")

    @property
    def n_levels(self) -> int:
        return self.grid.n

    def to_json(self) -> str:
        return json.dumps({
            "l_max": self.grid.l_max,
            "n": self.grid.n,
            "mu0": self.mu0,
            "root_dist": self.root_dist.tolist(),
            "supports": [b.tolist() for b in self.beliefs],
            "kernels": [k.tolist() for k in self.kernels],
        })

    @classmethod
    def from_json(cls, s: str) -> "DiscreteLearningProcess":
        d = json.loads(s)
        grid = LevelGrid(d["l_max"], d["n"])
        return cls(grid, tuple(np.array(b) for b in d["supports"]),
                   tuple(np.array(k) for k in d["kernels"]),
                   np.array(d["root_dist"]), d["mu0"])


def no_learning(mu0: float, grid: LevelGrid) -> DiscreteLearningProcess:
    """Constant martingale: one node with belief mu0 at every level."""
    beliefs = tuple(np.array([mu0]) for _ in range(grid.n))
    kernels = tuple(np.array([[1.0]]) for _ in range(grid.n - 1))
    return DiscreteLearningProcess(grid, beliefs, kernels, np.array([1.0]), mu0)


def full_revelation(mu0: float, grid: LevelGrid) -> DiscreteLearningProcess:
    """The state is learned at level 0; beliefs are 0 or 1 forever after."""
    support = np.array([0.0, 1.0])
    beliefs = tuple(support.copy() for _ in range(grid.n))
    kernels = tuple(np.eye(2) for _ in range(grid.n - 1))
    return DiscreteLearningProcess(grid, beliefs, kernels,
                                   np.array([1.0 - mu0, mu0]), mu0)


def single_split(mu0: float, grid: LevelGrid, lo: float, hi: float) -> DiscreteLearningProcess:
    """One binary signal at level 0 splitting the prior into {lo, hi}; no
    further learning."""
    if not (0.0 <= lo <= mu0 <= hi <= 1.0) or lo == hi:
        raise DomainError("split must straddle the prior: lo <= mu0 <= hi")
    p_lo = (hi - mu0) / (hi - lo)
    support = np.array([lo, hi])
    beliefs = tuple(support.copy() for _ in range(grid.n))
    kernels = tuple(np.eye(2) for _ in range(grid.n - 1))
    return DiscreteLearningProcess(grid, beliefs, kernels,
                                   np.array([p_lo, 1.0 - p_lo]), mu0)


def binomial_tree(mu0: float, grid: LevelGrid, p_good: float = 0.6,
                  p_bad: float = 0.4) -> DiscreteLearningProcess:
    """Recombining binary-signal tree: each step emits a signal with
    P(up | safe) = p_good, P(up | unsafe) = p_bad; nodes are indexed by the
    up-count and beliefs follow Bayes' rule."""
    if not (0.0 < p_bad < p_good < 1.0):
        raise DomainError("need 0 < p_bad < p_good < 1")
    if not (0.0 < mu0 < 1.0):
        raise DomainError("binomial tree needs an interior prior")
    n = grid.n
    beliefs: List[np.ndarray] = []
    for j in range(n):
        u = np.arange(j + 1)
        # posterior from u up-signals out of j, via log-likelihoods
        log_lr = (u * np.log(p_good / p_bad)
                  + (j - u) * np.log((1 - p_good) / (1 - p_bad)))
        odds = mu0 / (1.0 - mu0) * np.exp(log_lr)
        beliefs.append(odds / (1.0 + odds))
    kernels = []
    for j in range(n - 1):
        k = np.zeros((j + 1, j + 2))
        mu = beliefs[j]
        p_up = mu * p_good + (1.0 - mu) * p_bad
        k[np.arange(j + 1), np.arange(j + 1) + 1] = p_up
        k[np.arange(j + 1), np.arange(j + 1)] = 1.0 - p_up
        kernels.append(k)
    return DiscreteLearningProcess(grid, tuple(beliefs), tuple(kernels),
                                   np.array([1.0]), mu0)


def random_tree(mu0: float, grid: LevelGrid, seed: int,
                max_beliefs: int = 4) -> DiscreteLearningProcess:
    """Seeded random layered martingale with at most max_beliefs per level.

    Each level's support is a random set containing 0 and 1 (so any node can
    split); each node either stays put or splits onto its bracketing support
    points with martingale-consistent probabilities.
    """
    rng = np.random.default_rng(seed)
    n = grid.n
    beliefs = []
    kernels = []
    prev = np.array([mu0])
    beliefs.append(prev)
    for j in range(1, n):
        n_interior = max_beliefs - 2
        interior = np.sort(rng.uniform(0.0, 1.0, size=rng.integers(0, n_interior + 1)))
        support = np.unique(np.concatenate([[0.0, 1.0], interior]))
        k = np.zeros((len(prev), len(support)))
        for i, mu in enumerate(prev):
            exact = np.nonzero(np.abs(support - mu) <= 1e-13)[0]
            if exact.size and rng.random() < 0.5:
                k[i, exact[0]] = 1.0
                continue
            lo_cands = np.nonzero(support <= mu)[0]
            hi_cands = np.nonzero(support >= mu)[0]
            lo = support[rng.choice(lo_cands)]
            hi = support[rng.choice(hi_cands)]
            if hi - lo <= 1e-13:
                k[i, lo_cands[-1]] = 1.0
                continue
            p_lo = (hi - mu) / (hi - lo)
            k[i, np.searchsorted(support, lo)] += p_lo
            k[i, np.searchsorted(support, hi)] += 1.0 - p_lo
        kernels.append(k)
        beliefs.append(support)
        prev = support
    return DiscreteLearningProcess(grid, tuple(beliefs), tuple(kernels),
                                   np.array([1.0]), mu0)
