"""Closed-form statistical and entropic corrections.

Every bound has a ``*_log`` twin taking ln(1/eps) instead of eps, so callers
whose security parameters underflow a double (post-selection shrinks eps by
(N+1)^-15) can stay in log space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .entropy import binary_entropy
from .errors import DomainError

LN2 = math.log(2.0)


@dataclass(frozen=True)
class FluctuationBounds:
    """Audit trail of the corrections applied to one rate evaluation."""

    xi_pe: float
    xi_att: float
    xi_coh: float
    leak_bits: float
    aep_bits_per_signal: float
    half_width: float

    def __post_init__(self):
        for name in ("xi_pe", "xi_att", "xi_coh", "leak_bits", "aep_bits_per_signal", "half_width"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0.0):
                raise DomainError(f"{name} must be finite and non-negative, got {value}")


def ln_inv(eps: float) -> float:
    """ln(1/eps) with domain checking."""
    if not eps > 0.0:
        raise DomainError(f"security parameter must be > 0, got {eps}")
    return -math.log(eps)


def _check_counts(**counts):
    for name, value in counts.items():
        if not value >= 1:
            raise DomainError(f"{name} must be >= 1, got {value}")


def xi_pe_log(ln_inv_eps: float, n: float, m: float) -> float:
    _check_counts(n=n, m=m)
    if ln_inv_eps < 0.0:
        raise DomainError("eps must be <= 1")
    return math.sqrt((n + m) * (m + 1) * ln_inv_eps / (8.0 * m * m * n))


def xi_pe(eps: float, n: float, m: float) -> float:
    """Deviation between the sampled QBER on m signals and the QBER on the other n.

    Holds except with probability ``eps`` for any permutation-invariant state.
    """
    return xi_pe_log(ln_inv(eps), n, m)


def xi_att_log(ln_inv_eps: float, chi: int, n: float) -> float:
    _check_counts(n=n)
    if chi < 2:
        raise DomainError(f"POVM needs at least 2 outcomes, got {chi}")
    if ln_inv_eps < 0.0:
        raise DomainError("eps must be <= 1")
    return math.sqrt((8.0 * LN2 * chi + 8.0 * ln_inv_eps) / n)


def xi_att(eps: float, chi: int, n: float) -> float:
    """1-norm deviation of a chi-outcome frequency distribution from that of a product state."""
    return xi_att_log(ln_inv(eps), chi, n)


def xi_coh_log(ln_inv_eps_bar: float, n: float, m: float) -> float:
    return 0.5 * xi_att_log(ln_inv_eps_bar, 2, n) + xi_pe_log(ln_inv_eps_bar + LN2, n, m)


def xi_coh(eps_bar: float, n: float, m: float) -> float:
    """Tolerance for coherent attacks: xi_att(eps_bar, 2, n)/2 + xi_pe(eps_bar/2, n, m)."""
    return xi_coh_log(ln_inv(eps_bar), n, m)


def leak_ec_log(n: float, qber: float, efficiency: float, ln_inv_eps_ec: float) -> float:
    _check_counts(n=n)
    if not 0.0 <= qber <= 0.5:
        raise DomainError(f"qber must be in [0, 1/2], got {qber}")
    if efficiency < 1.0:
        raise DomainError(f"EC efficiency must be >= 1, got {efficiency}")
    if not ln_inv_eps_ec > 0.0:
        raise DomainError("eps_EC must be < 1")
    return n * efficiency * binary_entropy(qber) + 1.0 + ln_inv_eps_ec / LN2


def leak_ec(n: float, qber: float, efficiency: float, eps_ec: float) -> float:
    """Bits disclosed by error correction plus verification, n f h(Q) + log2(2/eps_EC)."""
    return leak_ec_log(n, qber, efficiency, ln_inv(eps_ec))


def aep_correction_log(n: float, ln_inv_eps_smooth: float) -> float:
    _check_counts(n=n)
    log2_arg = 1.0 + ln_inv_eps_smooth / LN2
    if log2_arg < 0.0:
        raise DomainError("smoothing parameter must be <= 2")
    return 5.0 * math.sqrt(log2_arg / n)


def aep_correction(n: float, eps_smooth: float) -> float:
    """Per-signal AEP penalty 5 sqrt(log2(2/eps)/n) for tensor-product states."""
    if not 0.0 < eps_smooth <= 2.0:
        raise DomainError(f"smoothing parameter must be in (0, 2], got {eps_smooth}")
    return aep_correction_log(n, ln_inv(eps_smooth))


def log_multinomial_weight(counts) -> float:
    """ln( n!/(n_1!...n_k!) * prod (n_i/n)^{n_i} ), with 0 ln 0 = 0."""
    counts = [int(c) for c in counts]
    if any(c < 0 for c in counts):
        raise DomainError(f"counts must be non-negative, got {counts}")
    n = sum(counts)
    if n < 1:
        raise DomainError("counts must sum to at least 1")
    value = math.lgamma(n + 1)
    for c in counts:
        if c:
            value += c * math.log(c / n) - math.lgamma(c + 1)
    return value


def multinomial_floor_holds(counts) -> bool:
    """Whether the probability of the most typical realization exceeds 1/n^2."""
    n = sum(int(c) for c in counts)
    return log_multinomial_weight(counts) > -2.0 * math.log(n)
