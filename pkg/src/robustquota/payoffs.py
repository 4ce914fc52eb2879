"""State-dependent payoff families and indirect utilities.

A payoff spec evaluates u(theta, l) for the binary state theta in {0, 1}
(1 = technology safe) and a development level l.  Indirect utility mixes the
two states linearly in the belief: U(mu, l) = mu u(1,l) + (1-mu) u(0,l).
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import DomainError
from .grid import LevelGrid


class PayoffSpec:
    """Base class; subclasses implement u(theta, l) vectorized over l."""

    #: True when u(0, l) cannot be evaluated at l = 0 (CRRA's 1/l wealth map).
    singular_at_zero = False

    def u(self, theta: int, l):
        raise NotImplementedError

    def u1(self, levels: np.ndarray) -> np.ndarray:
        return np.asarray(self.u(1, levels), dtype=float)

    def u0(self, levels: np.ndarray) -> np.ndarray:
        return np.asarray(self.u(0, levels), dtype=float)

    def indirect(self, mu: float, l):
        """U(mu, l) = mu u(1,l) + (1-mu) u(0,l)."""
        return mu * self.u(1, l) + (1.0 - mu) * self.u(0, l)

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Quadratic(PayoffSpec):
    """u(1,l) = alpha*l, u(0,l) = -beta*l - quad*l**2.

    The risk-neutral developer is the quad=0 instance; a regulator who also
    internalizes a quadratic harm in the bad state carries quad > 0.
    """

    alpha: float
    beta: float
    quad: float = 0.0

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0 or self.quad < 0:
            raise DomainError("Quadratic requires alpha, beta > 0 and quad >= 0")

    def u(self, theta, l):
        l = np.asarray(l, dtype=float)
        if theta == 1:
            return self.alpha * l
        return -self.beta * l - self.quad * l * l

    def to_dict(self):
        return {"family": "quadratic", "alpha": self.alpha, "beta": self.beta,
                "quad": self.quad}


@dataclass(frozen=True)
class CARA(PayoffSpec):
    """Constant absolute risk aversion over terminal wealth W(1,l)=l, W(0,l)=-l."""

    gamma: float

    def __post_init__(self):
        if self.gamma <= 0:
            raise DomainError("CARA requires gamma > 0")

    def u(self, theta, l):
        l = np.asarray(l, dtype=float)
        w = l if theta == 1 else -l
        return -np.exp(-self.gamma * w)

    def to_dict(self):
        return {"family": "cara", "gamma": self.gamma}


@dataclass(frozen=True)
class CRRA(PayoffSpec):
    """Constant relative risk aversion (gamma != 1) over W(1,l)=l, W(0,l)=1/l.

    W(0, 0) is singular, so bad-state evaluation floors the level at `eps`;
    checkers that need derivatives skip the origin for this family.
    """

    gamma: float
    eps: float = 1e-9
    singular_at_zero = True

    def __post_init__(self):
        if self.gamma == 1.0 or self.gamma <= 0:
            raise DomainError("CRRA requires gamma > 0, gamma != 1")
        if self.eps <= 0:
            raise DomainError("CRRA eps must be positive")

    def u(self, theta, l):
        l = np.asarray(l, dtype=float)
        l = np.maximum(l, self.eps)
        w = l if theta == 1 else 1.0 / l
        return (np.power(w, 1.0 - self.gamma) - 1.0) / (1.0 - self.gamma)

    def to_dict(self):
        return {"family": "crra", "gamma": self.gamma, "eps": self.eps}


@dataclass(frozen=True)
class Tabulated(PayoffSpec):
    """Payoffs given at the grid points; off-grid levels interpolate linearly."""

    grid: LevelGrid
    values1: tuple  # u(1, l_j)
    values0: tuple  # u(0, l_j)

    def __post_init__(self):
        v1 = np.asarray(self.values1, dtype=float)
        v0 = np.asarray(self.values0, dtype=float)
        if v1.shape != (self.grid.n,) or v0.shape != (self.grid.n,):
            raise DomainError("tabulated payoff length must equal grid size")
        if not (np.isfinite(v1).all() and np.isfinite(v0).all()):
            raise DomainError("tabulated payoffs must be finite")
        object.__setattr__(self, "values1", tuple(v1))
        object.__setattr__(self, "values0", tuple(v0))

    def u(self, theta, l):
        vals = self.values1 if theta == 1 else self.values0
        return np.interp(np.asarray(l, dtype=float), self.grid.points, vals)

    def to_dict(self):
        return {"family": "tabulated", "u1": list(self.values1),
                "u0": list(self.values0)}


def quadratic_pair(alpha: float, beta: float, gamma: float) -> Tuple[Quadratic, Quadratic]:
    """(developer, regulator) quadratic pair: the developer is risk neutral,
    the regulator additionally suffers gamma * l^2 in the bad state."""
    return Quadratic(alpha, beta, 0.0), Quadratic(alpha, beta, gamma)


def cara_pair(gamma_agent: float, gamma_principal: float) -> Tuple[CARA, CARA]:
    return CARA(gamma_agent), CARA(gamma_principal)


def indirect_utility(p: PayoffSpec, mu: float, l, grid: LevelGrid = None) -> float:
    """U(mu, l); raises a domain error when l leaves [0, l_max] of the grid."""
    if not 0.0 <= mu <= 1.0:
        raise DomainError(f"belief {mu} outside [0, 1]")
    if grid is not None:
        arr = np.asarray(l, dtype=float)
        if np.any(arr < 0.0) or np.any(arr > grid.l_max):
            raise DomainError(f"level {l} outside [0, {grid.l_max}]")
    out = p.indirect(mu, l)
    return float(out) if np.ndim(out) == 0 else out


def liability_transform(agent: PayoffSpec, cap: float, principal: PayoffSpec,
                        grid: LevelGrid) -> Tabulated:
    """Capped ex-post liability: the agent pays, in the bad state, the gap by
    which its payoff exceeds the principal's, up to the cap M.

    Returns the tabulated transformed payoff u~(theta, l) = u - L(theta, l)
    with L(1, l) = 0 and L(0, l) = clip(u(0,l) - v(0,l), 0, M).
    """
    if cap < 0:
        raise DomainError("liability cap must be nonnegative")
    pts = grid.points
    u1 = agent.u1(pts)
    u0 = agent.u0(pts)
    gap = np.clip(u0 - principal.u0(pts), 0.0, cap)
    return Tabulated(grid, tuple(u1), tuple(u0 - gap))


def payoff_from_dict(d: dict, grid: LevelGrid = None) -> PayoffSpec:
    """Construct a payoff spec from its JSON form."""
    if not isinstance(d, dict) or "family" not in d:
        raise DomainError("payoff spec must be an object with a 'family' key")
    fam = d["family"]
    if fam == "quadratic":
        return Quadratic(d["alpha"], d["beta"], d.get("quad", 0.0))
    if fam == "cara":
        return CARA(d["gamma"])
    if fam == "crra":
        return CRRA(d["gamma"], d.get("eps", 1e-9))
    if fam == "tabulated":
        if grid is None:
            raise DomainError("tabulated payoff requires a grid")
        return Tabulated(grid, tuple(d["u1"]), tuple(d["u0"]))
    raise DomainError(f"unknown payoff family {fam!r}")
