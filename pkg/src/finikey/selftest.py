"""Oracle-backed self-test exposed as ``finikey selftest``."""
from __future__ import annotations

import time

import numpy as np

from . import oracle
from .entropy import BellDiagonalState, ErrorConstraintSet, conditional_entropy_xe, min_sxe
from .protocol import Protocol

DUAL_PATH_TOL = 1e-9
GRID_BAND = (5e-3, 1e-6)  # primary within [grid - 5e-3, grid + 1e-6]
PRECISION_TOL = 1e-12

AGREEMENT_CENTERS = (0.0, 0.01, 0.05, 0.1, 0.15)
AGREEMENT_WIDTHS = (0.0, 0.01)


def agreement_grid():
    """The 20 (protocol, center, width) constraint sets used for the min_sxe oracle comparison."""
    return [ErrorConstraintSet(p, c, w) for p in Protocol for c in AGREEMENT_CENTERS for w in AGREEMENT_WIDTHS]


def random_states(count: int, seed: int = 0) -> list[BellDiagonalState]:
    rng = np.random.default_rng(seed)
    return [BellDiagonalState(tuple(lam)) for lam in rng.dirichlet(np.full(4, 0.5), size=count)]


def dual_path_gap(count: int = 1000, seed: int = 0) -> float:
    states = random_states(count, seed)
    return max(abs(conditional_entropy_xe(s) - oracle.sxe_second_path(s)) for s in states)


def grid_band_violations(constraints_list=None) -> list[tuple[ErrorConstraintSet, float, float]]:
    below, above = GRID_BAND
    bad = []
    for cs in constraints_list or agreement_grid():
        primary = min_sxe(cs).value
        grid = oracle.min_sxe_grid(cs).value
        if not grid - below <= primary <= grid + above:
            bad.append((cs, primary, grid))
    return bad


def run_selftest(quick: bool = False, out=print) -> bool:
    states = 100 if quick else 1000
    floors = 1000 if quick else 10_000
    checks = []

    def record(name, ok, detail, started):
        checks.append(ok)
        out(f"{'PASS' if ok else 'FAIL'}  {name:<34s} {detail}  ({time.perf_counter() - started:.1f}s)")

    t = time.perf_counter()
    gap = dual_path_gap(states)
    record("S(X|E) dual path", gap < DUAL_PATH_TOL, f"max gap {gap:.2e} over {states} states", t)

    t = time.perf_counter()
    bad = grid_band_violations()
    record("min S(X|E) vs exhaustive grid", not bad, f"{len(bad)} of 20 outside band", t)

    t = time.perf_counter()
    worst = oracle.bound_precision_check(100)
    record("bounds vs 50-digit arithmetic", worst < PRECISION_TOL, f"max rel err {worst:.2e}", t)

    t = time.perf_counter()
    report = oracle.multinomial_floor_sweep(floors)
    record("multinomial 1/n^2 floor", report.violations == 0,
           f"{report.violations} violations in {report.checked}, min margin {report.worst_margin:.3g}", t)
    return all(checks)
