"""Secret-key rates per initial signal for collective attacks, coherent attacks
(via the min-entropy reduction to product states) and the post-selection technique.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import bounds
from .bounds import LN2, FluctuationBounds
from .entropy import ErrorConstraintSet, min_sxe
from .errors import DomainError, InfeasibleError
from .protocol import AttackModel, Protocol, ProtocolSpec

POSTSELECTION_EPS_EXPONENT = 15
POSTSELECTION_PENALTY = 30


@dataclass(frozen=True)
class SecurityBudget:
    """Failure probabilities of parameter estimation, error correction,
    privacy amplification and smoothing.

    ``eps_pe`` may be 0: the coherent-attack tolerance depends on ``eps_bar`` only.
    """

    eps_pe: float
    eps_ec: float
    eps_pa: float
    eps_bar: float

    def __post_init__(self):
        if not 0.0 <= self.eps_pe < 1.0:
            raise DomainError(f"eps_pe must be in [0, 1), got {self.eps_pe}")
        for name in ("eps_ec", "eps_pa", "eps_bar"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise DomainError(f"{name} must be in (0, 1), got {value}")

    def total(self, model: AttackModel) -> float:
        """Security parameter of the resulting key under ``model``'s composition rule."""
        bar_weight = 2.0 if AttackModel(model) is AttackModel.COHERENT else 1.0
        return self.eps_pe + self.eps_ec + self.eps_pa + bar_weight * self.eps_bar

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.eps_pe, self.eps_ec, self.eps_pa, self.eps_bar)


@dataclass(frozen=True)
class RatePoint:
    protocol: ProtocolSpec
    attack_model: AttackModel
    N: float
    m: float
    qber: float
    budget: SecurityBudget
    rate: float
    bounds: FluctuationBounds
    minimizer_lambda: tuple[float, float, float, float]
    feasible: bool = True
    notes: tuple[str, ...] = field(default=())

    @property
    def key_rate(self) -> float:
        """Reported rate, clamped at zero."""
        return max(self.rate, 0.0)

    @property
    def n(self) -> float:
        return self.protocol.sifted(self.N) - self.m

    @property
    def eps_total(self) -> float:
        return self.budget.total(self.attack_model)


def signal_counts(protocol: ProtocolSpec, N: float, m: float) -> tuple[float, float]:
    """(N_s, n) for a run of N signals with m of them used for parameter estimation."""
    if not N >= 1 or not math.isfinite(N):
        raise DomainError(f"N must be a finite count >= 1, got {N}")
    n_sifted = protocol.sifted(N)
    if n_sifted < 2:
        raise DomainError(f"only {n_sifted} signals survive sifting; need at least 2")
    if not 1 <= m <= n_sifted - 1:
        raise DomainError(f"m must satisfy 1 <= m <= N_s - 1 = {n_sifted - 1}, got {m}")
    return n_sifted, n_sifted - m


def _log_budget(budget: SecurityBudget, shift: float = 0.0):
    # ln(1/eps) per component; eps_pe = 0 maps to +inf
    pe = math.inf if budget.eps_pe == 0.0 else -math.log(budget.eps_pe)
    return (pe + shift, -math.log(budget.eps_ec) + shift, -math.log(budget.eps_pa) + shift,
            -math.log(budget.eps_bar) + shift)


def _evaluate(model: AttackModel, protocol: ProtocolSpec, N: float, m: float, qber: float,
              logs, detail: bool = False):
    """Rate for ``model`` given ln(1/eps) of (pe, ec, pa, bar); post-selection expects shrunken logs."""
    ln_pe, ln_ec, ln_pa, ln_bar = logs
    _, n = signal_counts(protocol, N, m)
    xi_att = bounds.xi_att_log(ln_bar, protocol.povm_outcomes, n)
    xi_coh = bounds.xi_coh_log(ln_bar, n, m)
    if model is AttackModel.COHERENT:
        xi_pe = bounds.xi_pe_log(ln_pe, n, m) if math.isfinite(ln_pe) else 0.0
        half_width = xi_coh
        # smoothing eps_bar/(2 n^2): 5 sqrt(log2(4 n^2 / eps_bar) / n)
        aep = bounds.aep_correction_log(n, ln_bar + math.log(2.0 * n * n))
        offset = -1.0 / N
    else:
        if not math.isfinite(ln_pe):
            raise DomainError("eps_pe must be > 0 for collective attacks and post-selection")
        xi_pe = bounds.xi_pe_log(ln_pe, n, m)
        half_width = xi_pe
        aep = bounds.aep_correction_log(n, ln_bar)
        offset = 0.0
    if model is AttackModel.POSTSELECTION:
        offset -= POSTSELECTION_PENALTY * math.log2(N + 1.0) / N
    leak = bounds.leak_ec_log(n, qber, protocol.ec_efficiency, ln_ec)
    pa_term = (2.0 / N) * (1.0 - ln_pa / LN2)

    try:
        minimum = min_sxe(ErrorConstraintSet(protocol.kind, qber, half_width))
    except InfeasibleError:
        if not detail:
            return 0.0
        minimum = None
    if minimum is None:
        rate = 0.0
        lam = (math.nan,) * 4
    else:
        rate = float((n / N) * (minimum.value - leak / n - aep) + offset + pa_term)
        lam = minimum.lam
    if not detail:
        return rate
    audit = FluctuationBounds(xi_pe=xi_pe, xi_att=xi_att, xi_coh=xi_coh, leak_bits=leak,
                              aep_bits_per_signal=aep, half_width=half_width)
    return rate, audit, lam, minimum is not None


def _rate_point(model, protocol, N, m, qber, budget, logs) -> RatePoint:
    rate, audit, lam, feasible = _evaluate(model, protocol, N, m, qber, logs, detail=True)
    notes = () if feasible else ("parameter-estimation set is infeasible; rate set to 0",)
    return RatePoint(protocol, model, N, m, qber, budget, rate, audit, lam, feasible, notes)


def _as_spec(protocol) -> ProtocolSpec:
    if isinstance(protocol, ProtocolSpec):
        return protocol
    return ProtocolSpec(Protocol.parse(protocol) if isinstance(protocol, str) else Protocol(protocol))


def rate_collective(protocol, N: float, m: float, qber: float, budget: SecurityBudget) -> RatePoint:
    """Key rate under collective attacks, secure with eps_PE + eps_EC + eps_PA + eps_bar."""
    protocol = _as_spec(protocol)
    if budget.eps_pe <= 0.0:
        raise DomainError("collective attacks need eps_pe > 0")
    return _rate_point(AttackModel.COLLECTIVE, protocol, N, m, qber, budget, _log_budget(budget))


def rate_coherent(protocol, N: float, m: float, qber: float, budget: SecurityBudget) -> RatePoint:
    """Key rate under coherent attacks, secure with eps_PE + eps_EC + eps_PA + 2 eps_bar.

    The tolerated deviation is xi_coh(eps_bar, n, m); the product-state smoothing
    parameter is eps_bar/(2 n^2) and the reduction costs one extra bit.
    """
    protocol = _as_spec(protocol)
    return _rate_point(AttackModel.COHERENT, protocol, N, m, qber, budget, _log_budget(budget))


def postselection_log_shift(N: float) -> float:
    """ln of the (N+1)^15 factor by which post-selection shrinks the collective budget."""
    return POSTSELECTION_EPS_EXPONENT * math.log(N + 1.0)


def rate_postselection(protocol, N: float, m: float, qber: float, budget_post: SecurityBudget) -> RatePoint:
    """Post-selection rate r_coll - 30 log2(N+1)/N.

    The collective rate is evaluated with every component of ``budget_post``
    multiplied by (N+1)^-15, so the collective total is eps_post (N+1)^-15.
    """
    protocol = _as_spec(protocol)
    if budget_post.eps_pe <= 0.0:
        raise DomainError("post-selection needs eps_pe > 0")
    logs = _log_budget(budget_post, shift=postselection_log_shift(N))
    return _rate_point(AttackModel.POSTSELECTION, protocol, N, m, qber, budget_post, logs)


def rate(model, protocol, N: float, m: float, qber: float, budget: SecurityBudget) -> RatePoint:
    model = AttackModel(model)
    if model is AttackModel.COLLECTIVE:
        return rate_collective(protocol, N, m, qber, budget)
    if model is AttackModel.COHERENT:
        return rate_coherent(protocol, N, m, qber, budget)
    return rate_postselection(protocol, N, m, qber, budget)
