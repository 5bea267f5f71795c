from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from supercaloric.errors import CapExceeded, InvalidInput, NonIterable
from supercaloric.exponents import Medium, Regime, classify_regime, exponent_table, moser_sequence


@pytest.mark.parametrize(
    "n, p, regime",
    [(2, 1.5, Regime.SupercriticalFast), (2, 3.0, Regime.SlowDiffusion), (3, 1.4, Regime.CriticalOrSubcritical),
     (3, 1.5, Regime.CriticalOrSubcritical), (1, 2.0, Regime.Heat), (1, 1.01, Regime.SupercriticalFast)],
)
def test_regimes(n, p, regime):
    assert classify_regime(Medium(n, p)) is regime


@pytest.mark.parametrize("n, p", [(0, 1.5), (2, 1.0), (2, 0.5), (1.5, 1.5), (2, float("nan"))])
def test_medium_rejects(n, p):
    with pytest.raises(InvalidInput):
        Medium(n, p)


def test_table_values():
    t = exponent_table(Medium(2, 1.5))
    assert (t.lambda_, t.q_barenblatt, t.g_critical) == (0.5, 1.25, 0.5)
    assert abs(t.q_gradient - 5 / 6) < 1e-12 and abs(t.s_critical - 2 / 3) < 1e-12
    t = exponent_table(Medium(3, 1.8))
    assert np.allclose([t.lambda_, t.q_barenblatt, t.q_gradient, t.s_critical], [1.2, 1.4, 1.05, 1 / 3], atol=1e-12)
    t = exponent_table(Medium(1, 1.5))
    assert abs(t.lambda_ - 1.0) < 1e-12 and abs(t.s_critical - 1 / 3) < 1e-12
    assert t.sobolev_q(2.0) == 1.5 + 1.5 * 2.0
    assert set(exponent_table(Medium(2, 1.5)).as_dict()) >= {"lambda", "q_barenblatt", "q_gradient", "s_critical", "g_critical"}


def test_regime_sweep_matches_lambda():
    for n in range(1, 6):
        for k in range(1, 200):
            p = float(Fraction(100 + k, 100))
            m = Medium(n, p)
            lam = exponent_table(m).lambda_
            assert (classify_regime(m) is Regime.SupercriticalFast) == (lam > 0 and p < 2)


def test_gap_shrinks_towards_critical_p():
    n = 3
    ps = np.linspace(1.5 + 1e-3, 1.99, 60)
    gaps = []
    for p in ps:
        t = exponent_table(Medium(n, float(p)))
        assert 0 < t.s_critical < 1 < t.q_barenblatt and 0 < t.g_critical < 1 and t.lambda_ > 0
        gaps.append(t.q_barenblatt - t.s_critical)
    assert np.all(np.diff(gaps) > 0) and gaps[0] < 0.01


def _rational_ladder(n, p, s0, count):
    p, s = Fraction(p), Fraction(s0)
    out = [s]
    for _ in range(count):
        s = s * (1 + p / n) - (2 - p)
        out.append(s)
    return out


def test_moser_example():
    tr = moser_sequence(Medium(2, 1.5), 0.7)
    exact = _rational_ladder(2, 1.5, 0.7, 5)
    assert tr.first_ge_one == 5
    assert np.allclose(tr.steps, [float(x) for x in exact], rtol=0, atol=1e-12)
    assert abs(tr.steps[1] - 0.725) < 1e-12 and abs(tr.steps[2] - 0.76875) < 1e-12
    assert abs(tr.steps[5] - 1.21377) < 1e-5
    assert tr.closed_form_check < 1e-12


def test_moser_fixed_point_and_start_above_one():
    m = Medium(2, 1.5)
    tr = moser_sequence(m, exponent_table(m).s_critical, cap=10)
    assert tr.first_ge_one is None and len(set(tr.steps)) == 1
    assert moser_sequence(m, 1.0).first_ge_one == 0


def test_moser_errors():
    m = Medium(2, 1.5)
    with pytest.raises(NonIterable):
        moser_sequence(m, 0.6)
    with pytest.raises(CapExceeded):
        moser_sequence(m, 0.6667, cap=3)
    with pytest.raises(InvalidInput):
        moser_sequence(Medium(2, 3.0), 0.7)


@st.composite
def ladders(draw):
    n = draw(st.integers(1, 5))
    crit = 2 * n / (n + 1)
    p = draw(st.floats(crit + 0.02, 1.98))
    sc = n * (2 - p) / p
    s0 = draw(st.floats(sc + 0.01, 1.5))
    return Medium(n, p), s0


@given(ladders())
def test_moser_recursion_matches_closed_form(case):
    m, s0 = case
    tr = moser_sequence(m, s0, cap=400)
    assert tr.closed_form_check < 1e-12 * max(1.0, max(abs(s) for s in tr.steps))
    assert all(b > a for a, b in zip(tr.steps, tr.steps[1:]))
    assert tr.steps[-1] >= 1 and all(s < 1 for s in tr.steps[:-1])
