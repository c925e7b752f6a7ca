"""Regime classification, performance metrics, submachines, trapezoid."""

import math

import numpy as np
import pytest

from triqubit import Regime, classify_regime, solve_point, thermo_report
from triqubit.errors import DomainError, ImpossibleCurrentsError
from triqubit.thermo import (
    HARMONIC_REGIMES,
    Role,
    continuity_residuals,
    cop_metrics,
    entropy_production,
    otto_conditions_and_trapezoid,
    regime_boundaries,
    submachine_report,
)

from conftest import BOOST, VALVE, global_point, local_point


# one representative (Q1, Q2, Q3, W) per labeled regime
REGIME_CASES = [
    ((1.0, -0.4, -0.8), 0.2, Regime.I),
    ((1.0, 0.4, -1.8), 0.4, Regime.II),
    ((1.0, -2.4, 0.8), 0.6, Regime.III),
    ((0.3, -0.5, 0.4), -0.2, Regime.IV),
    ((-1.0, 2.4, -0.8), 0.6, Regime.V),
    ((-1.0, 2.4, -1.0), -0.4, Regime.VI),
    ((-0.1, 0.4, 0.2), 0.5, Regime.VII),
    ((-1.0, 0.4, 0.2), -0.4, Regime.VIII),
    ((-1.0, -0.4, 0.8), 0.6, Regime.IX),
    ((-1.0, -0.4, 1.0), -0.4, Regime.X),
]


@pytest.mark.parametrize("Q,W,expected", REGIME_CASES)
def test_regime_table(Q, W, expected):
    assert classify_regime(Q, W) is expected
    # the classification is scale invariant
    s = 1e-9
    assert classify_regime(tuple(q * s for q in Q), W * s) is expected


def test_regime_zero_work_joins_workless_branch():
    assert classify_regime((0.3, -0.5, 0.4), 0.0) is Regime.IV
    assert classify_regime((-1.0, 0.4, 0.2), 0.0) is Regime.VIII


def test_regime_patterns_without_workless_row():
    assert classify_regime((1.0, -0.4, -0.8), -0.2) is Regime.UNCLASSIFIED
    assert classify_regime((1.0, 0.4, -1.8), -0.4) is Regime.UNCLASSIFIED


def test_regime_impossible_sign_patterns():
    with pytest.raises(ImpossibleCurrentsError):
        classify_regime((1.0, 1.0, 1.0), -3.0)
    with pytest.raises(ImpossibleCurrentsError):
        classify_regime((-0.2, -0.4, -0.1), 5.0)


def test_regime_near_zero_band():
    # a current inside epsilon * scale cannot be signed
    assert classify_regime((1e-7, -1.0, 1.0), 1.0) is Regime.UNCLASSIFIED
    assert classify_regime((0.0, 0.0, 0.0), 0.0) is Regime.UNCLASSIFIED
    # widening epsilon swallows otherwise classifiable points
    assert classify_regime((0.3, -0.5, 0.4), -0.2, epsilon=0.9) is Regime.UNCLASSIFIED
    with pytest.raises(DomainError):
        classify_regime((1.0, -1.0, 1.0), 0.0, epsilon=0.0)


def test_entropy_production_value_and_validation():
    s = entropy_production((1.0, -0.5, 0.25), (1.0, 2.0, 3.0))
    assert abs(s - (-1.0 + 0.25 - 0.25 / 3.0)) < 1e-15
    with pytest.raises(DomainError):
        entropy_production((1.0, 0.0, 0.0), (1.0, -2.0, 3.0))


def test_cop_metrics_formulas():
    m = cop_metrics((0.2, -0.5, 0.3), -0.1, (1.0, 2.0, 3.0), (1.31, 3.0, 3.57))
    assert abs(m.cop - 0.2 / 0.3) < 1e-15
    assert abs(m.cop_w - 0.2 / 0.2) < 1e-15
    assert abs(m.cop_max - 1.0 / 3.0) < 1e-15
    assert abs(m.cop_otto - 1.31 * 0.57 / (3.57 * 1.69)) < 1e-15


def test_cop_metrics_none_on_vanishing_denominators():
    m = cop_metrics((0.2, -0.5, 0.0), 0.0, (1.0, 1.0, 3.0), (2.0, 2.0, 3.0))
    assert m.cop is None
    assert m.cop_w is None
    assert m.cop_max is None
    assert m.cop_otto is None


def test_zero_work_merges_cop_and_cop_w():
    m = cop_metrics((0.2, -0.5, 0.3), 0.0, (1.0, 2.0, 3.0), (1.0, 2.0, 3.0))
    assert m.cop == m.cop_w


def test_regime_boundaries_lines():
    rb = regime_boundaries((1.0, 2.0, 3.0))
    assert rb.zero_work.slope == -1.0
    assert rb.zero_work.intercept == -1.0
    assert abs(rb.zero_entropy.slope + 2.0) < 1e-15
    assert abs(rb.zero_entropy.intercept + 2.0 / 3.0) < 1e-15
    # the lines cross at the maximal coefficient of performance
    assert abs(rb.intersection_x - 1.0 / 3.0) < 1e-15
    x = rb.intersection_x
    assert abs(rb.zero_work.y(x) - rb.zero_entropy.y(x)) < 1e-15


def test_regime_boundaries_degenerate_temperatures():
    rb = regime_boundaries((2.0, 2.0, 3.0))
    assert rb.intersection_x is None
    with pytest.raises(DomainError):
        regime_boundaries((1.0, 0.0, 3.0))


def test_trapezoid_membership():
    # coordinates are (B1/B3, B2/B3)
    assert otto_conditions_and_trapezoid((0.3, 0.7, 1.0), (1.0, 2.0, 3.0)).inside_trapezoid
    assert not otto_conditions_and_trapezoid((0.3, 0.5, 1.0), (1.0, 2.0, 3.0)).inside_trapezoid
    # below the lower horizontal edge
    assert not otto_conditions_and_trapezoid((0.2, 0.6, 1.0), (1.0, 2.0, 3.0)).inside_trapezoid
    with pytest.raises(DomainError):
        otto_conditions_and_trapezoid((0.0, 0.5, 1.0), (1.0, 2.0, 3.0))


def test_pair_windows_follow_field_ratios():
    w = otto_conditions_and_trapezoid((0.3, 0.9, 1.0), (1.0, 2.0, 3.0))
    assert w.pair_roles[(1, 2)] is Role.REFRIGERATOR  # 0.3/0.9 < 1/2
    assert w.pair_roles[(2, 3)] is Role.ENGINE  # 2/3 < 0.9 < 1
    assert w.pair_roles[(1, 3)] is Role.REFRIGERATOR


def test_continuity_residuals_balance():
    p = local_point(B=(0.9, 2.7, 4.1), gamma=(0.4, 0.8, 0.15))
    sol = solve_point(p)
    rep = thermo_report(sol)
    scale = max(abs(q) for q in rep.currents.q)
    assert max(abs(r) for r in continuity_residuals(rep.currents)) < 1e-9 * scale


def test_submachine_decomposition():
    p = local_point(
        B=(BOOST["B1"], 3.0, BOOST["B3"]), gamma=BOOST["gamma"],
        J=BOOST["J"], Delta=BOOST["Delta"],
    )
    sol = solve_point(p)
    rep = thermo_report(sol)
    assert rep.regime is Regime.IV
    subs = {f.pair: f for f in rep.submachines}
    assert set(subs) == {(1, 2), (1, 3), (2, 3)}
    for f in subs.values():
        # stored as the exact combination, so this identity is bitwise
        assert f.W_ij == -f.Q_ij - f.Q_ji
    # the pair works sum to the total work the machine absorbs
    total = sum(f.W_ij for f in subs.values())
    scale = max(abs(rep.W), max(abs(q) for q in rep.Q))
    assert abs(total + rep.W) < 1e-10 * scale
    # the (1,3) device produces work here; its efficiency is set by the
    # field ratio alone
    f13 = subs[(1, 3)]
    assert f13.role is Role.ENGINE
    assert abs(f13.efficiency_or_cop - (1.0 - p.B[0] / p.B[2])) < 1e-12


def test_all_refrigerator_submachines():
    # every pair absorbs work at this point, and each cop is the exact
    # field-ratio expression
    p = local_point(
        B=(VALVE["B1"], 1.0, VALVE["B3"]), gamma=(0.5, 0.5, 0.5),
        J=VALVE["J"], Delta=VALVE["Delta"],
    )
    sol = solve_point(p)
    rep = thermo_report(sol)
    subs = {f.pair: f for f in rep.submachines}
    for (i, j), f in subs.items():
        assert f.role is Role.REFRIGERATOR
        lo, hi = sorted((p.B[i - 1], p.B[j - 1]))
        assert abs(f.efficiency_or_cop - lo / (hi - lo)) < 1e-12


def test_thermo_report_local_laws():
    p = local_point(B=(0.9, 2.7, 4.1), gamma=(0.4, 0.8, 0.15))
    rep = thermo_report(solve_point(p))
    scale = max(abs(rep.W), max(abs(q) for q in rep.Q))
    assert rep.first_law_residual < 1e-10 * scale
    assert rep.magnetization_residual < 1e-10 * scale
    assert rep.S_dot > -1e-12
    assert abs(rep.S_dot - entropy_production(rep.Q, p.T)) == 0.0


def test_thermo_report_global_shape():
    rep = thermo_report(solve_point(global_point(B=(0.37, 0.61, 0.83))))
    assert rep.W == 0.0
    assert rep.currents is None
    assert rep.submachines is None
    assert rep.magnetization_residual is None
    assert rep.regime in HARMONIC_REGIMES or rep.regime is Regime.UNCLASSIFIED
    assert rep.first_law_residual < 1e-10 * max(abs(q) for q in rep.Q)


def test_entropy_production_compensated_sum():
    # the huge terms cancel exactly; a naive left-to-right sum would
    # swallow the remaining unit entirely
    s = entropy_production((1e100, -1e100, 1.0), (1.0, 1.0, 1.0))
    assert s == -1.0
