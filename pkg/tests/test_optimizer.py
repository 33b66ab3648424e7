import itertools
import math

import numpy as np
import pytest

from finikey.errors import DomainError
from finikey.optimizer import OptimizationSpec, m_grid, optimize_rate, share_grid
from finikey.protocol import AttackModel, Protocol, ProtocolSpec
from finikey.rates import SecurityBudget, rate

BB84 = ProtocolSpec(Protocol.BB84)
SIX = ProtocolSpec(Protocol.SIX_STATE)


def test_spec_validation():
    for kwargs in [dict(eps_total=0.0), dict(eps_total=1.0), dict(m_grid_density=4), dict(eps_grid_density=7),
                   dict(qber=0.7), dict(N=1.0)]:
        base = dict(model=AttackModel.COLLECTIVE, protocol=BB84, N=1e6, qber=0.01)
        base.update(kwargs)
        with pytest.raises(DomainError):
            OptimizationSpec(**base)


def test_grids():
    ms = m_grid(1e6, 24)
    assert ms[0] == 1 and ms[-1] == 1e6 - 1
    assert np.all(np.diff(ms) > 0) and np.all(ms == np.round(ms))
    shares = share_grid(1e-9, 4, 8)
    assert len(shares) == 8
    assert shares[0] == pytest.approx(2.5e-13) and shares[-1] == pytest.approx(7.5e-10)


@pytest.mark.parametrize("model", list(AttackModel))
def test_constraints_hold(opt, model):
    point = opt(model.value, "bb84", 1e6, 0.01)
    assert 1 <= point.m <= 1e6 - 1
    assert point.budget.total(model) == pytest.approx(1e-9, rel=1e-15)
    if model is AttackModel.COHERENT:
        assert point.budget.eps_pe == 0.0


@pytest.mark.parametrize("model", list(AttackModel))
def test_deterministic(model):
    spec = OptimizationSpec(model, SIX, 1e7, 0.05)
    assert optimize_rate(spec) == optimize_rate(spec)


@pytest.mark.parametrize("model", list(AttackModel))
def test_refinement_never_worse_than_grid(model):
    grid_only = optimize_rate(OptimizationSpec(model, BB84, 1e7, 0.05, refine_iterations=0))
    refined = optimize_rate(OptimizationSpec(model, BB84, 1e7, 0.05))
    assert refined.rate >= grid_only.rate


@pytest.mark.parametrize("model", list(AttackModel))
def test_rate_non_decreasing_in_eps_total(model):
    rates = [optimize_rate(OptimizationSpec(model, BB84, 1e6, 0.02, eps)).rate for eps in (1e-12, 1e-9, 1e-6)]
    assert rates[0] <= rates[1] + 1e-9 and rates[1] <= rates[2] + 1e-9


def test_below_cutoff_is_zero_with_note(opt):
    point = opt("collective", "bb84", 1e3, 0.1)
    assert point.key_rate == 0.0
    assert any("no positive rate" in note for note in point.notes)


def test_below_cutoff_confirmed_by_dense_scan():
    # independent scan: every integer-ish m on a fine log grid, every budget on a 12-point log grid
    N, q, total = 1e3, 0.1, 1e-9
    shares = np.geomspace(1e-13, total / 2, 12)
    best = -math.inf
    for m in np.unique(np.round(np.geomspace(1, N - 1, 60))):
        for pe, pa, bar in itertools.product(shares, repeat=3):
            ec = total - pe - pa - bar
            if ec <= 0:
                continue
            best = max(best, rate("collective", BB84, N, m, q, SecurityBudget(pe, ec, pa, bar)).rate)
    assert best <= 0.0


@pytest.mark.parametrize("model,protocol,N,q", [
    ("collective", BB84, 1e6, 0.01),
    ("coherent", BB84, 1e10, 0.1),
    ("postselection", SIX, 1e8, 0.1),
    ("coherent", SIX, 1e6, 0.05),
])
def test_grid_resolution_adequate(model, protocol, N, q):
    base = optimize_rate(OptimizationSpec(AttackModel(model), protocol, N, q))
    fine = optimize_rate(OptimizationSpec(AttackModel(model), protocol, N, q, m_grid_density=48, eps_grid_density=16))
    assert abs(fine.rate - base.rate) < 1e-3


@pytest.mark.parametrize("N,q", [(1e6, 0.05), (1e8, 0.1)])
def test_six_state_not_below_bb84(opt, N, q):
    assert opt("collective", "six-state", N, q).rate >= opt("collective", "bb84", N, q).rate - 1e-9
