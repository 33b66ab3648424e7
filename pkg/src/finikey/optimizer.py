"""Deterministic maximization of a key rate over m and the split of a fixed
total security parameter.

Search: a log-spaced grid over m, a log-spaced grid over the budget shares,
then coordinate descent in log coordinates. Error correction takes whatever
is left of the total, so its share never sits on the grid.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .protocol import AttackModel, ProtocolSpec
from .rates import (RatePoint, SecurityBudget, _evaluate, _rate_point,
                    postselection_log_shift, signal_counts)

SHARE_SPAN = 1e-3
STEP_SHRINK = 0.5
MIN_GAIN = 1e-12
_MIN_LOG_STEP = 1e-5


@dataclass(frozen=True)
class OptimizationSpec:
    model: AttackModel
    protocol: ProtocolSpec
    N: float
    qber: float
    eps_total: float = 1e-9
    m_grid_density: int = 24
    eps_grid_density: int = 8
    refine_iterations: int = 200

    def __post_init__(self):
        object.__setattr__(self, "model", AttackModel(self.model))
        if not 0.0 < self.eps_total < 1.0:
            raise DomainError(f"eps_total must be in (0, 1), got {self.eps_total}")
        if self.m_grid_density < 8 or self.eps_grid_density < 8:
            raise DomainError("grid densities must be >= 8")
        if self.refine_iterations < 0:
            raise DomainError("refine_iterations must be >= 0")
        if not 0.0 <= self.qber <= 0.5:
            raise DomainError(f"qber must be in [0, 1/2], got {self.qber}")
        signal_counts(self.protocol, self.N, 1)


@dataclass
class _Problem:
    """Maps search coordinates to (m, budget) and evaluates the rate."""

    spec: OptimizationSpec
    n_sifted: float
    free: tuple[str, ...]
    weights: dict[str, float] = field(default_factory=dict)
    shift: float = 0.0

    def m_of(self, log_m: float) -> float:
        return float(min(max(round(math.exp(log_m)), 1), self.n_sifted - 1))

    def budget_of(self, log_shares) -> SecurityBudget | None:
        # shares are contributions to eps_total under the model's composition rule
        total = self.spec.eps_total
        shares = dict(zip(self.free, (math.exp(v) for v in log_shares)))
        slack = total - sum(shares.values())
        if slack <= 0.0:
            return None
        eps = {"eps_pe": 0.0, "eps_ec": slack}
        for name, share in shares.items():
            eps[name] = share / self.weights.get(name, 1.0)
        try:
            return SecurityBudget(**eps)
        except DomainError:
            return None

    def logs_of(self, budget: SecurityBudget):
        pe = math.inf if budget.eps_pe == 0.0 else -math.log(budget.eps_pe)
        return (pe + self.shift, -math.log(budget.eps_ec) + self.shift,
                -math.log(budget.eps_pa) + self.shift, -math.log(budget.eps_bar) + self.shift)

    def value(self, x) -> tuple[float, float, SecurityBudget | None]:
        m = self.m_of(x[0])
        budget = self.budget_of(x[1:])
        if budget is None:
            return -math.inf, m, None
        s = self.spec
        return _evaluate(s.model, s.protocol, s.N, m, s.qber, self.logs_of(budget)), m, budget


def _problem(spec: OptimizationSpec) -> _Problem:
    n_sifted, _ = signal_counts(spec.protocol, spec.N, 1)
    if spec.model is AttackModel.COHERENT:
        # eps_pe does not enter the coherent rate; it sits at its lower bound 0
        return _Problem(spec, n_sifted, ("eps_pa", "eps_bar"), {"eps_bar": 2.0})
    shift = postselection_log_shift(spec.N) if spec.model is AttackModel.POSTSELECTION else 0.0
    return _Problem(spec, n_sifted, ("eps_pe", "eps_pa", "eps_bar"), shift=shift)


def _order_key(rate: float, m: float, budget: SecurityBudget):
    # total order: higher rate first, then smaller m, then smaller eps components
    return (-rate, m, budget.as_tuple())


def m_grid(n_sifted: float, density: int) -> np.ndarray:
    """Distinct integer m values, log-spaced over [1, N_s - 1]."""
    hi = max(n_sifted - 1.0, 1.0)
    raw = np.unique(np.round(np.geomspace(1.0, hi, density)))
    return raw[(raw >= 1) & (raw <= hi)]


def share_grid(eps_total: float, n_components: int, density: int) -> np.ndarray:
    """Log-spaced shares spanning [1e-3, 1] times the equal share eps_total/n_components."""
    equal = eps_total / n_components
    return np.geomspace(SHARE_SPAN * equal, equal * (n_components - 1), density)


def optimize_rate(spec: OptimizationSpec) -> RatePoint:
    """Best RatePoint found for ``spec``; rate 0 with a diagnostic note if nothing is positive."""
    prob = _problem(spec)
    k = len(prob.free) + 1
    shares = np.log(share_grid(spec.eps_total, k, spec.eps_grid_density))
    ms = m_grid(prob.n_sifted, spec.m_grid_density)

    best = None
    for m in ms:
        for combo in itertools.product(shares, repeat=len(prob.free)):
            x = (math.log(m),) + combo
            value, m_val, budget = prob.value(x)
            if budget is None:
                continue
            key = _order_key(value, m_val, budget)
            if best is None or key < best[0]:
                best = (key, np.array(x), value)
    if best is None:
        raise DomainError("no admissible point on the optimization grid")

    x, fx = best[1], best[2]
    steps = np.full(len(x), shares[1] - shares[0])
    if len(ms) > 1:
        steps[0] = math.log(ms[1] / ms[0]) if ms[0] > 0 else 1.0
    for _ in range(spec.refine_iterations):
        if steps.max() < _MIN_LOG_STEP:
            break
        moved = False
        for i in range(len(x)):
            for sign in (1.0, -1.0):
                trial = x.copy()
                trial[i] += sign * steps[i]
                value, _, budget = prob.value(trial)
                if budget is not None and value > fx + MIN_GAIN:
                    x, fx, moved = trial, value, True
                    break
        if not moved:
            steps *= STEP_SHRINK

    m = prob.m_of(x[0])
    budget = prob.budget_of(x[1:])
    s = spec
    point = _rate_point(s.model, s.protocol, s.N, m, s.qber, budget, prob.logs_of(budget))
    if point.rate <= 0.0:
        point = RatePoint(point.protocol, point.attack_model, point.N, point.m, point.qber, point.budget,
                          point.rate, point.bounds, point.minimizer_lambda, point.feasible,
                          point.notes + ("no positive rate found on grid or during refinement",))
    return point
