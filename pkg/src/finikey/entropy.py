"""Bell-diagonal states, von Neumann entropies and the worst-case S(X|E).

Eve holds a purification of the Bell-diagonal state with orthonormal
4-dimensional ancillas; Alice measures in the computational (Z) basis.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InfeasibleError, InvalidStateError
from .protocol import Protocol, ProtocolSpec

_SQRT_HALF = 1.0 / math.sqrt(2.0)

#: Bell vectors (phi+, phi-, psi+, psi-) in the |ab> basis ordered 00, 01, 10, 11.
BELL_BASIS = _SQRT_HALF * np.array(
    [
        [1.0, 0.0, 0.0, 1.0],
        [1.0, 0.0, 0.0, -1.0],
        [0.0, 1.0, 1.0, 0.0],
        [0.0, 1.0, -1.0, 0.0],
    ]
)

EIG_CLAMP = 1e-10

# min_sxe search schedule
GRID_STEP = 5e-3
MAX_AXIS_POINTS = 17
REFINE_TOL_BITS = 1e-10
_MIN_STEP = 1e-12
_MAX_REFINE_MOVES = 10000
_CACHE_DIGITS = 9


def binary_entropy(p: float) -> float:
    """Shannon entropy in bits of a Bernoulli(p) variable, with 0 log 0 = 0."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"binary entropy needs 0 <= p <= 1, got {p}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def shannon_entropy(probs) -> np.ndarray:
    """Entropy in bits along the last axis; entries <= 0 contribute nothing."""
    p = np.asarray(probs, dtype=float)
    safe = np.where(p > 0.0, p, 1.0)
    return -np.sum(np.where(p > 0.0, p * np.log2(safe), 0.0), axis=-1)


@dataclass(frozen=True)
class BellDiagonalState:
    """Weights λ on the projectors onto (phi+, phi-, psi+, psi-)."""

    lam: tuple[float, float, float, float]

    def __post_init__(self):
        lam = tuple(float(v) for v in self.lam)
        if len(lam) != 4:
            raise InvalidStateError("a Bell-diagonal state has exactly four weights")
        if min(lam) < -1e-12:
            raise InvalidStateError(f"negative Bell weight in {lam}")
        if abs(sum(lam) - 1.0) > 1e-10:
            raise InvalidStateError(f"Bell weights sum to {sum(lam)}, not 1")
        object.__setattr__(self, "lam", tuple(max(v, 0.0) for v in lam))

    @classmethod
    def from_error_rates(cls, e_z: float, e_x: float, e_y: float) -> "BellDiagonalState":
        return cls(_lambda_from_rates(e_z, e_x, e_y))

    @property
    def e_z(self) -> float:
        return self.lam[2] + self.lam[3]

    @property
    def e_x(self) -> float:
        return self.lam[1] + self.lam[3]

    @property
    def e_y(self) -> float:
        return self.lam[1] + self.lam[2]

    def density_matrix(self) -> np.ndarray:
        """The 4x4 two-qubit operator sum_i λ_i |Bell_i><Bell_i|."""
        return np.einsum("i,ij,ik->jk", np.asarray(self.lam), BELL_BASIS, BELL_BASIS)


def _lambda_from_rates(e_z, e_x, e_y):
    lam = (
        1.0 - 0.5 * (e_z + e_x + e_y),
        0.5 * (e_x + e_y - e_z),
        0.5 * (e_z + e_y - e_x),
        0.5 * (e_z + e_x - e_y),
    )
    return lam


def von_neumann_entropy(rho) -> float:
    """S(rho) = -tr(rho log2 rho) for a density operator given as a square array."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidStateError(f"expected a square matrix, got shape {rho.shape}")
    if not np.allclose(rho, rho.conj().T, rtol=0.0, atol=1e-12):
        raise InvalidStateError("operator is not Hermitian")
    trace = np.trace(rho).real
    if abs(trace - 1.0) > 1e-10:
        raise InvalidStateError(f"trace is {trace}, not 1")
    mu = np.linalg.eigvalsh(rho)
    if mu.min() < -EIG_CLAMP:
        raise InvalidStateError(f"eigenvalue {mu.min()} is negative")
    mu = np.clip(mu, 0.0, None)
    return float(shannon_entropy(mu))


def purification(state: BellDiagonalState) -> np.ndarray:
    """|phi> = sum_i sqrt(λ_i) |Bell_i>_AB |i>_E as a 16-vector, index order (a, b, e)."""
    amp = np.sqrt(np.asarray(state.lam))
    return np.einsum("i,ij,ie->je", amp, BELL_BASIS, np.eye(4)).reshape(16)


def cq_state(state: BellDiagonalState) -> np.ndarray:
    """ρ_XE (8x8, index order (x, e)) after Alice's Z measurement with Bob traced out."""
    phi = purification(state)
    rho_abe = np.outer(phi, phi.conj()).reshape(2, 2, 4, 2, 2, 4)
    rho_xe = np.zeros((2, 4, 2, 4), dtype=rho_abe.dtype)
    for x in range(2):
        # projector |x><x| on A, then partial trace over B
        rho_xe[x, :, x, :] = np.einsum("bebf->ef", rho_abe[x, :, :, x, :, :])
    return rho_xe.reshape(8, 8)


def conditional_entropy_xe(state: BellDiagonalState) -> float:
    """S(X|E) = S(ρ_XE) - S(ρ_E) from the explicit 8x8 classical-quantum operator."""
    rho_xe = cq_state(state)
    rho_e = np.einsum("xexf->ef", rho_xe.reshape(2, 4, 2, 4))
    value = von_neumann_entropy(rho_xe) - von_neumann_entropy(rho_e)
    return min(max(value, 0.0), 1.0)


def _xlog2x(p):
    return p * np.log2(np.maximum(p, 1e-300))


def sxe_from_error_rates(e_z, e_x, e_y):
    """Vectorized S(X|E) = 1 + h(e_Z) - H(λ) for states given by their error rates.

    This is the closed form of :func:`conditional_entropy_xe`: each Z outcome
    leaves Eve with a rank-two operator of spectrum ((1-e_Z)/2, e_Z/2).
    """
    e_z = np.asarray(e_z, dtype=float)
    e_x = np.asarray(e_x, dtype=float)
    e_y = np.asarray(e_y, dtype=float)
    total = -_xlog2x(e_z) - _xlog2x(1.0 - e_z)
    for lam in _lambda_from_rates(e_z, e_x, e_y):
        total = total + _xlog2x(np.maximum(lam, 0.0))
    return 1.0 + total


@dataclass(frozen=True)
class ErrorConstraintSet:
    """States whose monitored error rates all lie within half_width of center."""

    protocol: Protocol
    center: float
    half_width: float

    def __post_init__(self):
        kind = self.protocol.kind if isinstance(self.protocol, ProtocolSpec) else self.protocol
        object.__setattr__(self, "protocol", Protocol(kind))
        if not 0.0 <= self.center <= 0.5:
            raise DomainError(f"QBER center must be in [0, 1/2], got {self.center}")
        if not self.half_width >= 0.0 or not math.isfinite(self.half_width):
            raise DomainError(f"half_width must be finite and >= 0, got {self.half_width}")

    def contains(self, state: BellDiagonalState, tol: float = 1e-12) -> bool:
        rates = {"Z": state.e_z, "X": state.e_x, "Y": state.e_y}
        return all(abs(rates[b] - self.center) <= self.half_width + tol for b in self.protocol.monitored_bases)


@dataclass(frozen=True)
class EntropyMinimum:
    value: float
    lam: tuple[float, float, float, float]


def min_sxe(constraints: ErrorConstraintSet) -> EntropyMinimum:
    """Infimum of S(X|E) over the Bell-diagonal states allowed by ``constraints``.

    Raises
    ------
    InfeasibleError
        If no state satisfies the constraints.
    """
    return _min_sxe_cached(
        constraints.protocol,
        round(constraints.center, _CACHE_DIGITS),
        round(constraints.half_width, _CACHE_DIGITS),
    )


class _Region:
    """Feasible set in coordinates (e_Z, e_X, u), u in [0, 1] placing e_Y within its allowed interval."""

    def __init__(self, protocol: Protocol, center: float, half_width: float):
        self.six_state = protocol is Protocol.SIX_STATE
        self.center = center
        self.half_width = half_width
        lo, hi = max(0.0, center - half_width), min(1.0, center + half_width)
        self.lower = np.array([lo, lo, 0.0])
        self.upper = np.array([hi, hi, 1.0])

    def e_y_interval(self, e_z, e_x):
        lo = np.abs(e_z - e_x)
        hi = np.minimum(e_z + e_x, 2.0 - e_z - e_x)
        if self.six_state:
            lo = np.maximum(lo, self.center - self.half_width)
            hi = np.minimum(hi, self.center + self.half_width)
        return lo, hi

    def to_rates(self, pts):
        e_z, e_x, u = pts[..., 0], pts[..., 1], pts[..., 2]
        lo, hi = self.e_y_interval(e_z, e_x)
        return e_z, e_x, lo + u * np.maximum(hi - lo, 0.0), hi >= lo - 1e-15

    def objective(self, pts):
        e_z, e_x, e_y, ok = self.to_rates(pts)
        return np.where(ok, sxe_from_error_rates(e_z, e_x, e_y), np.inf)

    def scalar(self, e_z: float, e_x: float, u: float) -> float:
        # same as objective() for one point, without numpy call overhead
        lo = abs(e_z - e_x)
        hi = min(e_z + e_x, 2.0 - e_z - e_x)
        if self.six_state:
            lo = max(lo, self.center - self.half_width)
            hi = min(hi, self.center + self.half_width)
        if hi < lo - 1e-15:
            return math.inf
        e_y = lo + u * max(hi - lo, 0.0)
        total = 1.0 - _xlog2x_scalar(e_z) - _xlog2x_scalar(1.0 - e_z)
        for lam in _lambda_from_rates(e_z, e_x, e_y):
            total += _xlog2x_scalar(lam)
        return total


def _xlog2x_scalar(p: float) -> float:
    return p * math.log2(p) if p > 0.0 else 0.0


def _axis(lo: float, hi: float) -> np.ndarray:
    if hi - lo <= 0.0:
        return np.array([lo])
    count = min(int(math.ceil((hi - lo) / GRID_STEP)) + 1, MAX_AXIS_POINTS)
    return np.linspace(lo, hi, count)


@functools.lru_cache(maxsize=65536)
def _min_sxe_cached(protocol: Protocol, center: float, half_width: float) -> EntropyMinimum:
    region = _Region(protocol, center, half_width)
    axes = [_axis(lo, hi) for lo, hi in zip(region.lower, region.upper)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    values = region.objective(grid)
    best = int(np.argmin(values))
    if not np.isfinite(values[best]):
        raise InfeasibleError(f"no {protocol.value} state has error rates within {half_width} of {center}")
    x, fx = grid[best].copy(), float(values[best])

    # coordinate descent: try +/- step on each coordinate, take the best move, halve on failure
    x = [float(v) for v in x]
    lower, upper = region.lower.tolist(), region.upper.tolist()
    steps = [(a[1] - a[0]) if len(a) > 1 else 0.0 for a in axes]
    for _ in range(_MAX_REFINE_MOVES):
        if max(steps) <= _MIN_STEP:
            break
        best_val, best_x = fx, None
        for i in range(3):
            if steps[i] == 0.0:
                continue
            for sign in (1.0, -1.0):
                trial = list(x)
                trial[i] = min(max(x[i] + sign * steps[i], lower[i]), upper[i])
                val = region.scalar(*trial)
                if val < best_val:
                    best_val, best_x = val, trial
        if best_x is not None and fx - best_val > REFINE_TOL_BITS * 1e-3:
            x, fx = best_x, best_val
        else:
            steps = [0.5 * v for v in steps]
    x = np.array(x)

    e_z, e_x, e_y, _ = region.to_rates(x)
    lam = tuple(float(v) for v in np.clip(_lambda_from_rates(float(e_z), float(e_x), float(e_y)), 0.0, None))
    return EntropyMinimum(min(max(fx, 0.0), 1.0), lam)


def clear_cache() -> None:
    _min_sxe_cached.cache_clear()
