import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from supercaloric.closed_form import (
    INF,
    InfinitePointSource,
    PowerSupersolution,
    SingularBarenblatt,
    normalize_mass,
    pointwise_rate_exact,
)
from supercaloric.errors import ContainmentViolation, EmptyProbeList, InvalidInput, NotSolution
from supercaloric.exponents import Medium
from supercaloric.grid_solver import RadialGrid, pointwise_min, solve, traces_from
from supercaloric.harnack import (
    HarnackProbe,
    RateVerdict,
    ball_average,
    constant_sweep,
    l1_harnack_probe,
    pointwise_rate_detect,
    rate_schedule,
    self_similar_probes,
    weak_harnack_probe,
)
from supercaloric.integrability import ClassVerdict, classify
from supercaloric.sources import ConstantField, Truncated

M2 = Medium(2, 1.5)
M1 = Medium(1, 1.5)
SBB2 = SingularBarenblatt(M2, c=normalize_mass(M2))
SBB1 = SingularBarenblatt(M1, c=normalize_mass(M1))


def test_probe_validation():
    with pytest.raises(InvalidInput):
        HarnackProbe(0.0, 0.0, 1.0)
    with pytest.raises(InvalidInput):
        HarnackProbe(0.0, 1.0, 1.0, c2_trial=1.0)


def test_ball_average_oracle():
    # linear profile 1 + |x| over B(0, 1) in two dimensions: mean 1 + 2/3
    from supercaloric.sources import CallableSource

    src = CallableSource(lambda r, t: 1 + r + 0 * t, 2, 1.5)
    assert math.isclose(ball_average(src, 0.0, 1.0, 0.0), 5 / 3, rel_tol=1e-12)
    off = ball_average(src, 2.0, 0.5, 0.0)
    assert 2.9 < off < 3.1


@settings(max_examples=20)
@given(st.floats(0.1, 10.0), st.floats(0.01, 0.99), st.floats(0.05, 2.0))
def test_constant_field_weak_harnack(K, c2, r):
    rep = weak_harnack_probe(ConstantField(K, 2, 1.5), HarnackProbe(0.3, r, 1.0, c2))
    assert rep.admissible_c1 == 1.0 and rep.avg == K and rep.inf_over_window == K
    assert rep.window[0] < rep.window[1]
    assert math.isclose(rep.theta, c2 * K**0.5)


def test_barenblatt_probe_in_unit_interval():
    rep = weak_harnack_probe(SBB2, HarnackProbe(0.0, 0.25, 1.0, 0.1))
    assert 0 < rep.admissible_c1 <= 1


def test_self_similar_sweep():
    probes = self_similar_probes(M2, r=0.25, s=1.0, scales=5)
    rep = constant_sweep(SBB2, probes)
    base = weak_harnack_probe(SBB2, probes[0]).admissible_c1
    assert all(abs(c / base - 1) <= 0.05 for c in rep.admissible_c1)
    assert rep.min > 0 and rep.spread <= 2
    assert max(pr.r for pr in probes) / min(pr.r for pr in probes) == 16
    buf = io.StringIO()
    rep.write_csv(buf)
    assert buf.getvalue().splitlines()[0] == "scale,admissible_constant"


def test_constant_sweep_examples():
    rep = constant_sweep(ConstantField(2.0, 2, 1.5), [HarnackProbe(0.0, r, 1.0) for r in (0.1, 0.2, 0.4)])
    assert rep.admissible_c1 == (1.0, 1.0, 1.0) and rep.coefficient_of_variation == 0 and rep.min == 1
    with pytest.raises(EmptyProbeList):
        constant_sweep(SBB2, [])


def test_weak_harnack_containment():
    grid = RadialGrid.uniform(2, 0.0, 1.0, 40)
    ts = np.linspace(1.0, 1.5, 11)
    u = solve(M2, grid, ts, *traces_from(SBB2, grid, ts)[:2])
    weak_harnack_probe(u, HarnackProbe(0.0, 0.05, 1.0))
    with pytest.raises(ContainmentViolation):
        weak_harnack_probe(u, HarnackProbe(0.0, 0.1, 1.0))


def test_weak_harnack_on_discrete_supersolutions():
    grid = RadialGrid.uniform(2, 0.0, 2.0, 80)
    ts = np.linspace(1.0, 2.0, 21)
    u = solve(M2, grid, ts, *traces_from(SBB2, grid, ts)[:2])
    for k in (0.5, 1.0, 5.0):
        rep = weak_harnack_probe(pointwise_min(u, k), HarnackProbe(0.0, 0.1, 1.0))
        assert rep.admissible_c1 > 0


def test_l1_harnack_constant():
    K = 3.0
    out = l1_harnack_probe(ConstantField(K, 2, 1.5), 0.0, 1.0, 0.0, 1.0)
    assert out["lhs"] == K and out["rhs_inf"] == K
    assert math.isclose(out["admissible_c"], K / (K + out["drift"])) and out["admissible_c"] < 1


def test_l1_harnack_self_similar_barenblatt():
    lam = 1.0
    vals = [l1_harnack_probe(SBB1, 0.0, L, 0.5 * L**lam, L**lam)["admissible_c"] for L in (1, 2, 4, 8, 16)]
    assert all(math.isfinite(v) and v > 0 for v in vals)
    assert max(vals) / min(vals) <= 1.2
    assert abs(vals[-1] / vals[0] - 1) <= 0.2


def test_l1_harnack_preconditions():
    with pytest.raises(NotSolution):
        l1_harnack_probe(PowerSupersolution(M2, q=2.0), 0.5, 0.1, 1.0, 1.5)
    with pytest.raises(NotSolution):
        l1_harnack_probe(Truncated(SBB2, 1.0), 0.0, 0.5, 1.0, 1.5)
    with pytest.raises(NotSolution):
        l1_harnack_probe(InfinitePointSource(M2), 0.1, 0.2, 1.0, 1.5)
    with pytest.raises(InvalidInput):
        l1_harnack_probe(SBB2, 0.0, 0.5, 1.0, 1.0)
    with pytest.raises(ContainmentViolation):
        l1_harnack_probe(SBB2, 0.0, 0.5, -1.0, 1.0)


def test_l1_harnack_grid_solution():
    grid = RadialGrid.uniform(1, 0.0, 4.0, 160)
    ts = np.linspace(0.5, 1.0, 81)
    u = solve(M1, grid, ts, *traces_from(SBB1, grid, ts)[:2])
    out = l1_harnack_probe(u, 0.0, 1.0, 0.5, 1.0)
    exact = l1_harnack_probe(SBB1, 0.0, 1.0, 0.5, 1.0)
    assert math.isclose(out["admissible_c"], exact["admissible_c"], rel_tol=0.05)


def test_rate_schedule_shape():
    sched = rate_schedule(1.5)
    assert len(sched) == 13 and sched[0] == (0.5, 0.5 * 0.5**1.5)
    assert rate_schedule(1.5, tau_max=1e-3)[0][1] <= 1e-3


def test_rate_point_source():
    rep = pointwise_rate_detect(InfinitePointSource(M2, zero_extended=True), 0.0, 1.0, t0=0.0)
    assert rep.verdict is RateVerdict.PositiveRate
    assert abs(rep.rate_estimate / 0.75 - 1) < 0.01
    with pytest.raises(InvalidInput):
        pointwise_rate_detect(InfinitePointSource(M2), 0.0, 1.0, t0=1.0)


@pytest.mark.parametrize("x0", [0.0, 0.3, 0.8])
def test_rate_barenblatt_zero(x0):
    sbb = SingularBarenblatt(M2, zero_extended=True, c=normalize_mass(M2))
    assert pointwise_rate_detect(sbb, x0, 1.0).verdict is RateVerdict.ZeroRate


def test_rate_power_family():
    rep = pointwise_rate_detect(PowerSupersolution(M2, q=2.0), 0.0, 1.0)
    assert rep.verdict is RateVerdict.PositiveRate and rep.rate_estimate is INF
    assert rep.as_dict()["rate_estimate"] == "inf"


@pytest.mark.parametrize(
    "family",
    [InfinitePointSource(M2), InfinitePointSource(M1), PowerSupersolution(M2, q=1.5), PowerSupersolution(M2, q=1.2),
     SingularBarenblatt(M1, c=2.0)],
    ids=["ips2", "ips1", "power-q=p", "power-q<p", "sbb1"],
)
@pytest.mark.parametrize("x0", [0.0, 0.4])
def test_rate_matches_exact(family, x0):
    rep = pointwise_rate_detect(family, x0, 1.0)
    exact = pointwise_rate_exact(family, x0, 1.0)
    if exact == 0:
        assert rep.verdict is RateVerdict.ZeroRate
    elif exact is INF:
        assert rep.rate_estimate is INF
    else:
        assert rep.verdict is RateVerdict.PositiveRate and abs(rep.rate_estimate / exact - 1) < 0.01


@pytest.mark.parametrize("family", [InfinitePointSource(M2, zero_extended=True), PowerSupersolution(M2, q=1.5),
                                    PowerSupersolution(M2, q=2.0)], ids=["ips", "power-q=p", "power-q>p"])
def test_positive_rate_implies_class_m(family):
    assert pointwise_rate_detect(family, 0.0, 0.5).verdict is RateVerdict.PositiveRate
    assert classify(family).verdict is ClassVerdict.ClassM
