"""Independent numerical routes used to audit the primary computations.

Nothing here shares code with the primary paths beyond the Bell-basis
table and the input dataclasses. Speed is not a goal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy.special import gammaln

from . import bounds
from .entropy import BELL_BASIS, BellDiagonalState, ErrorConstraintSet, EntropyMinimum
from .errors import InfeasibleError
from .protocol import Protocol

GRID_RESOLUTION = 1e-3


def _entropy_bits(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0.0, -p * np.log(p), 0.0)
    return terms.sum(axis=-1) / math.log(2.0)


def _gram_spectrum(a, b, c):
    """Eigenvalues of the 2x2 Hermitian matrix [[a, c], [conj(c), b]] (vectorized)."""
    mean = 0.5 * (a + b)
    radius = np.sqrt((0.5 * (a - b)) ** 2 + np.abs(c) ** 2)
    return mean - radius, mean + radius


def _sxe_batch(lam: np.ndarray) -> np.ndarray:
    """S(X|E) via S(ρ_E) = H(λ) and S(ρ_XE) from Gram matrices of Eve's conditional vectors.

    For outcome x, Eve's unnormalized conditional state is sum_b |v_xb><v_xb| with
    v_xb = sum_i sqrt(λ_i) <x b|Bell_i> |i>; its nonzero spectrum equals that of the
    Gram matrix G_x[b, b'] = <v_xb|v_xb'>.
    """
    lam = np.atleast_2d(np.asarray(lam, dtype=float))
    amp = np.sqrt(np.clip(lam, 0.0, None))
    coeff = BELL_BASIS.T.reshape(2, 2, 4)  # <x b|Bell_i>
    spectrum = []
    for x in range(2):
        v = amp[:, None, :] * coeff[x][None, :, :]  # (batch, b, i)
        g00 = np.einsum("ki,ki->k", v[:, 0], v[:, 0])
        g11 = np.einsum("ki,ki->k", v[:, 1], v[:, 1])
        g01 = np.einsum("ki,ki->k", v[:, 0], v[:, 1])
        spectrum.extend(_gram_spectrum(g00, g11, g01))
    s_xe = _entropy_bits(np.clip(np.stack(spectrum, axis=-1), 0.0, None))
    return s_xe - _entropy_bits(lam)


def sxe_second_path(state: BellDiagonalState) -> float:
    """S(X|E) for one state along the Gram-matrix route."""
    return float(_sxe_batch(np.asarray(state.lam))[0])


def _lattice(constraints: ErrorConstraintSet, units: int):
    """All λ on the 1/units lattice satisfying the constraints, as (k, 4) fractions."""
    c, w = constraints.center, constraints.half_width
    tol = 1e-9
    lo = max(0, math.ceil((c - w - tol) * units))
    hi = min(units, math.floor((c + w + tol) * units))
    if lo > hi:
        return np.empty((0, 4))
    out = []
    for l4 in range(0, hi + 1):
        l3 = np.arange(max(0, lo - l4), hi - l4 + 1)
        l2 = np.arange(max(0, lo - l4), hi - l4 + 1)
        if l3.size == 0 or l2.size == 0:
            continue
        L3, L2 = np.meshgrid(l3, l2, indexing="ij")
        L3, L2 = L3.ravel(), L2.ravel()
        L1 = units - L2 - L3 - l4
        keep = L1 >= 0
        if constraints.protocol is Protocol.SIX_STATE:
            e_y = L2 + L3
            keep &= (e_y >= lo) & (e_y <= hi)
        if keep.any():
            out.append(np.stack([L1[keep], L2[keep], L3[keep], np.full(keep.sum(), l4)], axis=-1))
    if not out:
        return np.empty((0, 4))
    return np.concatenate(out) / units


def min_sxe_grid(constraints: ErrorConstraintSet, resolution: float = GRID_RESOLUTION) -> EntropyMinimum:
    """Exhaustive minimum of S(X|E) over the λ lattice of the given resolution (no refinement)."""
    units = int(round(1.0 / resolution))
    lam = _lattice(constraints, units)
    if lam.shape[0] == 0:
        raise InfeasibleError("no lattice state satisfies the constraints")
    best_val, best_lam = math.inf, None
    for start in range(0, lam.shape[0], 200_000):
        chunk = lam[start:start + 200_000]
        vals = _sxe_batch(chunk)
        k = int(np.argmin(vals))
        if vals[k] < best_val:
            best_val, best_lam = float(vals[k]), tuple(chunk[k])
    return EntropyMinimum(best_val, best_lam)


# --- high-precision bound recomputation -------------------------------------------------

_DPS = 50


def xi_pe_mp(eps, n, m):
    with mpmath.workdps(_DPS):
        eps, n, m = mpmath.mpf(eps), mpmath.mpf(n), mpmath.mpf(m)
        return mpmath.sqrt((n + m) * (m + 1) * mpmath.log(1 / eps) / (8 * m * m * n))


def xi_att_mp(eps, chi, n):
    with mpmath.workdps(_DPS):
        eps, n = mpmath.mpf(eps), mpmath.mpf(n)
        return mpmath.sqrt((8 * mpmath.log(2) * chi + 8 * mpmath.log(1 / eps)) / n)


def leak_ec_mp(n, qber, efficiency, eps_ec):
    with mpmath.workdps(_DPS):
        q = mpmath.mpf(qber)
        h = mpmath.mpf(0) if q in (0, 1) else -q * mpmath.log(q, 2) - (1 - q) * mpmath.log(1 - q, 2)
        return mpmath.mpf(n) * mpmath.mpf(efficiency) * h + mpmath.log(2 / mpmath.mpf(eps_ec), 2)


def aep_correction_mp(n, eps_smooth):
    with mpmath.workdps(_DPS):
        return 5 * mpmath.sqrt(mpmath.log(2 / mpmath.mpf(eps_smooth), 2) / mpmath.mpf(n))


def _rel_err(value, reference) -> float:
    reference = float(reference)
    if reference == 0.0:
        return abs(value)
    return abs(value - reference) / abs(reference)


def bound_precision_check(count: int = 100, seed: int = 0) -> float:
    """Largest relative deviation of the double-precision bounds from 50-digit recomputation."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        eps = float(10.0 ** rng.uniform(-30, -1))
        n = float(np.round(10.0 ** rng.uniform(1, 12)))
        m = float(np.round(10.0 ** rng.uniform(0, 10)))
        qber = float(rng.uniform(0.0, 0.5))
        eff = float(rng.uniform(1.0, 1.5))
        worst = max(
            worst,
            _rel_err(bounds.xi_pe(eps, n, m), xi_pe_mp(eps, n, m)),
            _rel_err(bounds.xi_att(eps, 2, n), xi_att_mp(eps, 2, n)),
            _rel_err(bounds.leak_ec(n, qber, eff, eps), leak_ec_mp(n, qber, eff, eps)),
            _rel_err(bounds.aep_correction(n, eps), aep_correction_mp(n, eps)),
        )
    return worst


# --- multinomial floor -------------------------------------------------------------------

def log_multinomial_weight_batch(counts: np.ndarray) -> np.ndarray:
    counts = np.asarray(counts, dtype=float)
    n = counts.sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        xlogx = np.where(counts > 0, counts * np.log(counts / n[..., None]), 0.0)
    return gammaln(n + 1) - gammaln(counts + 1).sum(axis=-1) + xlogx.sum(axis=-1)


def random_compositions(count: int, n_min: int = 501, n_max: int = 1_000_000, seed: int = 0) -> np.ndarray:
    """Random 4-part compositions: n uniform in [n_min, n_max], parts from a Dirichlet draw."""
    rng = np.random.default_rng(seed)
    ns = rng.integers(n_min, n_max + 1, size=count)
    probs = rng.dirichlet(np.ones(4), size=count)
    return np.array([rng.multinomial(n, p) for n, p in zip(ns, probs)])


@dataclass(frozen=True)
class FloorReport:
    checked: int
    violations: int
    worst_margin: float


def multinomial_floor_sweep(count: int = 10_000, seed: int = 0) -> FloorReport:
    """Check the 1/n^2 floor on random compositions; margin is ln(weight) + 2 ln n."""
    comps = random_compositions(count, seed=seed)
    margin = log_multinomial_weight_batch(comps) + 2.0 * np.log(comps.sum(axis=-1))
    flags = np.array([bounds.multinomial_floor_holds(c) for c in comps])
    return FloorReport(count, int((~flags).sum()), float(margin.min()))


def balanced_composition(n: int) -> tuple[int, int, int, int]:
    """The most spread 4-part composition of n, where the multinomial weight is smallest."""
    q, r = divmod(n, 4)
    return tuple(q + 1 if i < r else q for i in range(4))


def smallest_floor_counterexample(max_n: int = 500) -> int | None:
    """Smallest n <= max_n whose balanced composition violates the 1/n^2 floor, if any."""
    for n in range(1, max_n + 1):
        if not bounds.multinomial_floor_holds(balanced_composition(n)):
            return n
    return None
