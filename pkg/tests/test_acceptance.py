"""Acceptance criteria, one PASS/FAIL line each.

Run under pytest (lines are repeated in the terminal summary) or directly:
``python3 tests/test_acceptance.py``.
"""
import filecmp
import math
import os
import sys
import tempfile
import time

import numpy as np
import pytest

from finikey.cli import improvement_percent, main
from finikey.entropy import binary_entropy
from finikey.oracle import bound_precision_check, multinomial_floor_sweep
from finikey.protocol import AttackModel
from finikey.selftest import dual_path_gap, grid_band_violations

try:
    from conftest import ACCEPTANCE_LINES, optimized
except ImportError:  # pragma: no cover - direct execution from elsewhere
    sys.path.insert(0, os.path.dirname(__file__))
    from conftest import ACCEPTANCE_LINES, optimized

EPS_TOTAL = 1e-9
MODELS = ("collective", "coherent", "postselection")
PROTOCOLS = ("bb84", "six-state")

# (protocol, Q, N, reference increase in percent, accepted band)
COMPARISON_POINTS = {
    1: [("bb84", 0.01, 1e6, 43, (28.0, 58.0)), ("bb84", 0.1, 1e10, 33, (18.0, 48.0))],
    2: [("six-state", 0.01, 1e6, 51, (36.0, 66.0)), ("six-state", 0.1, 1e8, 45, (30.0, 60.0))],
}
MAX_SECONDS_PER_POINT = 300.0

ASYMPTOTIC_N = 1e14
ASYMPTOTIC_QBERS = (0.01, 0.1)
ASYMPTOTIC_TOL = 1e-3
EC_EFFICIENCY = 1.1

GRID_QBERS = (0.01, 0.05, 0.1)
GRID_N = tuple(float(v) for v in np.geomspace(1e4, 1e12, 8))
MONOTONE_TOL = 1e-9
THRESHOLD_LOG_N = (2.0, 12.0)
THRESHOLD_STEPS = 12

FLOOR_SAMPLES = 10_000
FLOOR_SECONDS = 10.0


def report(number: int, ok: bool, text: str) -> bool:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {text}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


def rate_of(model, protocol, N, qber):
    return optimized(model, protocol, float(N), qber, EPS_TOTAL).key_rate


def comparison(number: int) -> bool:
    ok, parts = True, []
    for protocol, q, N, reference, (lo, hi) in COMPARISON_POINTS[number]:
        started = time.perf_counter()
        r_coh = rate_of("coherent", protocol, N, q)
        r_post = rate_of("postselection", protocol, N, q)
        elapsed = time.perf_counter() - started
        pct = improvement_percent(r_coh, r_post)
        good = pct is not None and lo <= pct <= hi and elapsed < MAX_SECONDS_PER_POINT
        ok &= good
        shown = "undefined" if pct is None else f"{pct:.1f}%"
        parts.append(f"{protocol} Q={q} N={N:g}: {shown} (band {lo:g}-{hi:g}%, reference {reference}%, {elapsed:.1f}s)")
    return report(number, ok, "r_coh over r_post; " + "; ".join(parts))


def asymptotic() -> bool:
    ok, parts = True, []
    for protocol in PROTOCOLS:
        for q in ASYMPTOTIC_QBERS:
            rates = [rate_of(model, protocol, ASYMPTOTIC_N, q) for model in MODELS]
            spread = max(rates) - min(rates)
            ok &= spread < ASYMPTOTIC_TOL
            text = f"{protocol} Q={q}: spread {spread:.2e}"
            if protocol == "bb84":
                target = 1.0 - (1.0 + EC_EFFICIENCY) * binary_entropy(q)
                gap = max(abs(r - target) for r in rates)
                ok &= gap < ASYMPTOTIC_TOL
                text += f", max gap to asymptote {target:.6f} is {gap:.2e}"
            parts.append(text)
    return report(3, ok, "N=1e14 convergence; " + "; ".join(parts))


def ordering() -> bool:
    violations, checked = [], 0
    for protocol in PROTOCOLS:
        for q in GRID_QBERS:
            for N in GRID_N:
                coll, coh, post = (rate_of(model, protocol, N, q) for model in MODELS)
                checked += 1
                if coh > coll or post > coll:
                    violations.append((protocol, q, N, coll, coh, post))
    return report(4, not violations, f"r_coll >= r_coh and r_coll >= r_post on {checked} grid points, "
                                     f"{len(violations)} violations {violations[:3]}")


def positivity_threshold(model, protocol, q) -> float:
    """Smallest log10 N with a positive optimized rate, by bisection."""
    lo, hi = THRESHOLD_LOG_N
    if rate_of(model, protocol, 10.0 ** hi, q) <= 0.0:
        return math.inf
    for _ in range(THRESHOLD_STEPS):
        mid = 0.5 * (lo + hi)
        if rate_of(model, protocol, 10.0 ** mid, q) > 0.0:
            hi = mid
        else:
            lo = mid
    return hi


def figure_shape() -> bool:
    ok, parts = True, []
    for protocol in PROTOCOLS:
        for q in GRID_QBERS:
            for model in MODELS:
                rates = [rate_of(model, protocol, N, q) for N in GRID_N]
                drops = [a - b for a, b in zip(rates, rates[1:]) if b < a - MONOTONE_TOL]
                if drops:
                    ok = False
                    parts.append(f"{model} {protocol} Q={q} decreases by up to {max(drops):.2e}")
            coh = positivity_threshold("coherent", protocol, q)
            post = positivity_threshold("postselection", protocol, q)
            ok &= coh < post
            parts.append(f"{protocol} Q={q}: positive from N~1e{coh:.2f} (coh) vs 1e{post:.2f} (post)")
    return report(5, ok, "monotone in N; " + "; ".join(parts))


def oracle_equivalence() -> bool:
    gap = dual_path_gap(1000)
    band = grid_band_violations()
    precision = bound_precision_check(100)
    ok = gap < 1e-9 and not band and precision < 1e-12
    return report(6, ok, f"dual-path gap {gap:.1e} (<1e-9), grid band violations {len(band)}/20, "
                         f"bound relative error {precision:.1e} (<1e-12)")


def multinomial_floor() -> bool:
    started = time.perf_counter()
    result = multinomial_floor_sweep(FLOOR_SAMPLES)
    elapsed = time.perf_counter() - started
    ok = result.violations == 0 and elapsed < FLOOR_SECONDS
    return report(7, ok, f"{result.violations} violations in {result.checked} compositions, "
                         f"min margin {result.worst_margin:.3f} nats, {elapsed:.2f}s")


def determinism() -> bool:
    args = ["sweep", "--protocol", "six-state", "--qber", "0.02,0.08", "--N-min", "1e4", "--N-max", "1e8",
            "--N-count", "3", "--format", "csv"]
    with tempfile.TemporaryDirectory() as tmp:
        paths = [os.path.join(tmp, f"run{i}.csv") for i in range(2)]
        codes = [main(args + ["--output", p]) for p in paths]
        same = filecmp.cmp(*paths, shallow=False)
        size = os.path.getsize(paths[0])
    return report(8, same and codes == [0, 0], f"two sweep runs byte-identical: {same} ({size} bytes)")


def test_criterion_1_bb84_comparison():
    assert comparison(1)


def test_criterion_2_six_state_comparison():
    assert comparison(2)


def test_criterion_3_asymptotic_convergence():
    assert asymptotic()


def test_criterion_4_ordering():
    assert ordering()


def test_criterion_5_figure_shape():
    assert figure_shape()


def test_criterion_6_oracle_equivalence():
    assert oracle_equivalence()


def test_criterion_7_multinomial_floor():
    assert multinomial_floor()


def test_criterion_8_determinism():
    assert determinism()


if __name__ == "__main__":
    results = [comparison(1), comparison(2), asymptotic(), ordering(), figure_shape(), oracle_equivalence(),
               multinomial_floor(), determinism()]
    sys.exit(0 if all(results) else 1)
