"""JSON run configuration: schema validation and object construction.

Schema (all nesting literal; unknown keys are rejected):

    {
      "payoff":      {"agent": <payoff>, "principal": <payoff>},
      "mechanism":   <mechanism>,                  # optional, default zero
      "grid":        {"l_max": float, "n": int},
      "belief_grid": {"n_mu": int},                # optional, default 1001
      "prior":       {"mu0": float},
      "seed":        int,                          # required by stochastic cmds
      "ambiguity":   [<payoff>, ...],              # optional
      "tree":        {"type": "no_learning" | "binomial",
                      "p_good": float, "p_bad": float},      # optional
      "mechanisms":  [<mechanism>, ...],           # optional (gap tables)
      "sweep":       {"l_max": [float, ...]},      # optional (gap tables)
      "refinements": {"count": int},               # optional
      "tolerances":  {<name>: float, ...}          # optional
    }

<payoff> is {"family": "quadratic"|"cara"|"crra"|"tabulated", ...}; <mechanism>
is {"type": "zero"|"fixed_tax_hard_quota"|"linear"|"exponential"|"tabulated",
...} as produced by the respective to_dict methods.
"""

import json
from dataclasses import dataclass, field
from typing import Optional

from .errors import ConfigError, DomainError
from .grid import LevelGrid
from .mechanisms import Mechanism, Zero, mechanism_from_dict
from .payoffs import PayoffSpec, payoff_from_dict

_TOP_KEYS = {"payoff", "mechanism", "grid", "belief_grid", "prior", "seed",
             "ambiguity", "tree", "mechanisms", "sweep", "refinements",
             "tolerances"}


@dataclass(frozen=True)
class RunConfig:
    agent: PayoffSpec
    principal: PayoffSpec
    mechanism: Mechanism
    grid: LevelGrid
    mu0: float
    n_mu: int = 1001
    seed: Optional[int] = None
    ambiguity: Optional[tuple] = None          # tuple of agent PayoffSpec
    tree: Optional[dict] = None
    mechanisms: Optional[tuple] = None
    sweep_l_max: Optional[tuple] = None
    n_refinements: int = 50
    tolerances: dict = field(default_factory=dict)

    def require_seed(self, command: str) -> int:
        if self.seed is None:
            raise ConfigError(f"'{command}' draws random samples: the config "
                              "must set an integer 'seed'")
        return self.seed


def _check_keys(d: dict, allowed: set, where: str):
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}")


def _require(d: dict, key: str, where: str):
    if key not in d:
        raise ConfigError(f"missing required key '{key}' in {where}")
    return d[key]


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as f:
            raw = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}")
    return parse_config(raw)


def parse_config(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    _check_keys(raw, _TOP_KEYS, "config root")

    gd = _require(raw, "grid", "config")
    _check_keys(gd, {"l_max", "n"}, "'grid'")
    try:
        grid = LevelGrid(float(_require(gd, "l_max", "'grid'")),
                         int(_require(gd, "n", "'grid'")))
    except DomainError as e:
        raise ConfigError(str(e))

    pd = _require(raw, "payoff", "config")
    _check_keys(pd, {"agent", "principal"}, "'payoff'")
    prior = _require(raw, "prior", "config")
    _check_keys(prior, {"mu0"}, "'prior'")
    mu0 = float(_require(prior, "mu0", "'prior'"))
    if not 0.0 <= mu0 <= 1.0:
        raise ConfigError(f"prior.mu0 = {mu0} outside [0, 1]")

    try:
        agent = payoff_from_dict(_require(pd, "agent", "'payoff'"), grid)
        principal = payoff_from_dict(_require(pd, "principal", "'payoff'"), grid)
        mech = mechanism_from_dict(raw["mechanism"], grid) \
            if "mechanism" in raw else Zero()
        ambiguity = tuple(payoff_from_dict(x, grid) for x in raw["ambiguity"]) \
            if "ambiguity" in raw else None
        mechanisms = tuple(mechanism_from_dict(x, grid) for x in raw["mechanisms"]) \
            if "mechanisms" in raw else None
    except DomainError as e:
        raise ConfigError(str(e))

    n_mu = 1001
    if "belief_grid" in raw:
        _check_keys(raw["belief_grid"], {"n_mu"}, "'belief_grid'")
        n_mu = int(_require(raw["belief_grid"], "n_mu", "'belief_grid'"))

    seed = raw.get("seed")
    if seed is not None and not isinstance(seed, int):
        raise ConfigError("'seed' must be an integer")

    tree = raw.get("tree")
    if tree is not None:
        _check_keys(tree, {"type", "p_good", "p_bad"}, "'tree'")
        if _require(tree, "type", "'tree'") not in ("no_learning", "binomial"):
            raise ConfigError(f"unknown tree type {tree['type']!r}")

    sweep = None
    if "sweep" in raw:
        _check_keys(raw["sweep"], {"l_max"}, "'sweep'")
        sweep = tuple(float(x) for x in _require(raw["sweep"], "l_max", "'sweep'"))

    n_ref = 50
    if "refinements" in raw:
        _check_keys(raw["refinements"], {"count"}, "'refinements'")
        n_ref = int(_require(raw["refinements"], "count", "'refinements'"))

    tol = raw.get("tolerances", {})
    if not isinstance(tol, dict) or not all(isinstance(v, (int, float))
                                            for v in tol.values()):
        raise ConfigError("'tolerances' must map names to numbers")

    return RunConfig(agent, principal, mech, grid, mu0, n_mu, seed, ambiguity,
                     tree, mechanisms, sweep, n_ref, dict(tol))
