"""Acceptance gate: one test per criterion, each reporting a PASS/FAIL line."""

import math
from fractions import Fraction

import numpy as np

from supercaloric.closed_form import (
    InfinitePointSource,
    SingularBarenblatt,
    mass_report,
    normalize_mass,
    pde_residual_fd,
)
from supercaloric.exponents import Medium, exponent_table, moser_sequence
from supercaloric.grid_solver import GridField, RadialGrid, SolverConfig, compare, pointwise_min, sample, solve, traces_from
from supercaloric.harnack import (
    HarnackProbe,
    RateVerdict,
    constant_sweep,
    pointwise_rate_detect,
    self_similar_probes,
    weak_harnack_probe,
)
from supercaloric.integrability import (
    ClassVerdict,
    CutoffFn,
    Cylinder,
    Verdict,
    caccioppoli_sides,
    classify,
    exponent_scan,
    scan_at,
    sobolev_sides,
)
from supercaloric.obstacle import ObstacleProblem, minimality_check, solve_obstacle
from supercaloric.sources import ConstantField

from conftest import ACCEPTANCE

M2 = Medium(2, 1.5)
M1 = Medium(1, 1.5)


def record(num, ok, detail):
    ACCEPTANCE[num] = (bool(ok), detail)
    print(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def test_criterion_01_exponents():
    t = exponent_table(M2)
    target = {"lambda_": 0.5, "q_barenblatt": 1.25, "q_gradient": 5 / 6, "s_critical": 2 / 3, "g_critical": 0.5}
    err = max(abs(getattr(t, k) - v) for k, v in target.items())
    record(1, err <= 1e-12, f"max deviation from (0.5, 1.25, 5/6, 2/3, 0.5) = {err:.1e}")


def _rational_ladder(n, p, s0, count):
    p, s, n = Fraction(p), Fraction(s0), Fraction(n)
    out = [s]
    for _ in range(count):
        s = s * (1 + p / n) - (2 - p)
        out.append(s)
    return out


def test_criterion_02_moser():
    tr = moser_sequence(M2, 0.7)
    exact = _rational_ladder(2, Fraction(3, 2), Fraction(7, 10), 5)
    s5_err = abs(tr.steps[5] - float(exact[5]))
    ladder_err = max(abs(a - float(b)) for a, b in zip(tr.steps, exact))
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 6))
        crit = 2 * n / (n + 1)
        p = float(rng.uniform(crit + 0.02, 1.98))
        sc = n * (2 - p) / p
        s0 = float(rng.uniform(sc + 0.01, 1.5))
        steps = moser_sequence(Medium(n, p), s0, cap=400).steps
        k = np.arange(len(steps))
        closed = sc + (s0 - sc) * (1 + p / n) ** k
        worst = max(worst, float(np.max(np.abs(np.array(steps) - closed) / np.maximum(1.0, np.abs(closed)))))
    ok = tr.first_ge_one == 5 and s5_err <= 1e-9 and round(tr.steps[5], 5) == 1.21377 and worst <= 1e-12
    record(2, ok, f"first_ge_one={tr.first_ge_one}, s5={tr.steps[5]!r} (exact 12429/10240, err {s5_err:.1e}; "
                  f"1.21377 to 5 decimals), ladder err {ladder_err:.1e}, 1000-draw closed-form err {worst:.1e}")


def test_criterion_03_fd_residuals():
    rng = np.random.default_rng(11)
    families = [SingularBarenblatt(M2, c=normalize_mass(M2)), InfinitePointSource(M2),
                SingularBarenblatt(M1, c=normalize_mass(M1)), InfinitePointSource(M1)]
    worst_res, orders = 0.0, []
    for fam in families:
        for _ in range(100):
            r, t = rng.uniform(0.5, 2.0, 2)
            u, _, ut, div = (float(v) for v in fam.arrays(r, t))
            scale = max(abs(ut), abs(div), abs(u) / t)
            h = 1e-3 * min(r, t)
            worst_res = max(worst_res, abs(pde_residual_fd(fam, r, t, h)) / scale)
            coarse = abs(pde_residual_fd(fam, r, t, 20 * h))
            fine = abs(pde_residual_fd(fam, r, t, 10 * h))
            orders.append(math.log2(coarse / fine))
    lo, hi = min(orders), max(orders)
    ok = 1.7 <= lo and hi <= 2.3 and worst_res < 1e-5
    record(3, ok, f"400 points (SBB/IPS, n=1,2): orders in [{lo:.3f}, {hi:.3f}], "
                  f"max |residual|/scale at h=1e-3 min(r,t) = {worst_res:.2e}")


def test_criterion_04_mass():
    c = normalize_mass(M1)
    analytic = (4 * math.pi / math.sqrt(3)) ** 1.5 / 3
    rep = mass_report(M1, c, (0.1, 1.0, 10.0))
    ok = abs(c / 6.5144 - 1) < 1e-3 and abs(c / analytic - 1) < 1e-10 and rep.max_relative_spread < 1e-6
    record(4, ok, f"c={c:.6f} (analytic {analytic:.6f}), masses {[round(m, 12) for m in rep.masses]}, "
                  f"spread {rep.max_relative_spread:.1e}")


def test_criterion_05_solver_convergence():
    f = SingularBarenblatt(M1, c=normalize_mass(M1))
    errs = []
    for J, K in ((40, 20), (80, 40), (160, 80)):
        g = RadialGrid.uniform(1, 0.0, 4.0, J)
        ts = np.linspace(0.5, 1.0, K + 1)
        init, outer, _ = traces_from(f, g, ts)
        u = solve(M1, g, ts, init, outer)
        errs.append(float(np.max(np.abs(u.values - sample(f, g, ts).values))))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    record(5, bool(np.all(orders >= 0.9)), f"max-norm errors {[f'{e:.2e}' for e in errs]}, orders {np.round(orders, 3).tolist()}")


def _random_pair(rng):
    n = int(rng.integers(1, 3))
    medium = Medium(n, 1.5)
    r0 = float(rng.choice([0.0, 0.1, 0.3]))
    grid = RadialGrid.uniform(n, r0, 1.0, int(rng.integers(20, 50)))
    ts = np.linspace(0.0, float(rng.uniform(0.05, 0.3)), int(rng.integers(6, 15)))
    a, b, w, d, e = rng.uniform(0.5, 2.0, 5)
    g0 = lambda r: a + b * np.cos(w * 3 * r) ** 2
    lift, amp, k = rng.uniform(0.0, 1.0, 3)
    bump = lambda r: lift + amp * np.sin(5 * k * r) ** 2
    outer = g0(1.0) + d * np.sin(7 * ts) ** 2
    inner = None if r0 == 0 else g0(r0) + e * ts
    u = solve(medium, grid, ts, g0, outer, inner)
    v = solve(medium, grid, ts, lambda r: g0(r) + bump(r), outer + lift + rng.uniform(0, 0.5) * ts,
              None if inner is None else inner + lift + amp * ts)
    return u, v


def test_criterion_06_comparison():
    rng = np.random.default_rng(6)
    tol = 10 * SolverConfig().picard_tol
    worst, ordered = 0.0, 0
    for _ in range(50):
        u, v = _random_pair(rng)
        rep = compare(u, v, tol=tol)
        worst = max(worst, rep.max_violation)
        ordered += rep.boundary_ordered and rep.interior_ordered and rep.max_violation < tol
    record(6, ordered == 50, f"{ordered}/50 pairs interior_ordered, max_violation {worst:.1e} (bound {tol:.0e})")


def test_criterion_07_obstacle():
    g = RadialGrid.uniform(2, 0.0, 1.0, 40)
    ts = np.linspace(0.0, 0.1, 11)
    prof = np.clip(1.0 - (g.nodes / 0.5) ** 2, 0.0, None) ** 2
    sol = solve_obstacle(ObstacleProblem(GridField(g, ts, np.tile(prof, (ts.size, 1)), 1.5)))
    minimal = all(minimality_check(sol, sol.u.with_values(sol.u.values + c)) for c in (0.0, 0.25, 1.0, 4.0))
    # obstacle = the exact discrete solution with Barenblatt data
    f = SingularBarenblatt(M1, c=normalize_mass(M1))
    g1 = RadialGrid.uniform(1, 0.0, 4.0, 80)
    ts1 = np.linspace(0.5, 1.0, 41)
    init, outer, _ = traces_from(f, g1, ts1)
    psi = solve(M1, g1, ts1, init, outer, config=SolverConfig(picard_tol=1e-14))
    back = solve_obstacle(ObstacleProblem(psi))
    dev = float(np.max(np.abs(back.u.values - psi.values)))
    ok = sol.complementarity_residual < 1e-3 and minimal and dev <= 10 * back.tol
    record(7, ok, f"bump complementarity {sol.complementarity_residual:.1e}, contact {sol.contact_fraction:.2f}, "
                  f"minimality vs u+c {minimal}, solution obstacle returned within {dev:.1e} (10 tol = {10 * back.tol:.1e})")


def test_criterion_08_dichotomy():
    b = classify(SingularBarenblatt(M2, zero_extended=True, c=normalize_mass(M2)))
    m = classify(InfinitePointSource(M2, zero_extended=True))
    exclusive = all(len({v for v in r.evidence["votes"].values() if v}) == 1 for r in (b, m))
    ok = b.verdict is ClassVerdict.ClassB and m.verdict is ClassVerdict.ClassM and exclusive
    record(8, ok, f"zero-extended SBB -> {b.verdict.value} {b.evidence['votes']}, "
                  f"zero-extended IPS -> {m.verdict.value} {m.evidence['votes']}")


def test_criterion_09_critical_exponents():
    ips = InfinitePointSource(M2, zero_extended=True)
    sbb = SingularBarenblatt(M2, zero_extended=True, c=normalize_mass(M2))
    unit, around = Cylinder(0.0, 1.0, 0.0, 1.0), Cylinder(0.0, 1.0, -1.0, 1.0)
    qv = exponent_scan(ips, unit, "value", 0.1, 1.5).q_star
    qg = exponent_scan(ips, unit, "gradient", 0.1, 1.5).q_star
    qb = exponent_scan(sbb, around, "value", 0.5, 2.0).q_star
    at_08 = scan_at(sbb, around, 0.8, "gradient").verdict
    at_56 = scan_at(sbb, around, 5 / 6, "gradient").verdict
    ok = (abs(qv - 0.667) <= 0.02 and abs(qg - 0.5) <= 0.02 and abs(qb - 1.25) <= 0.05
          and at_08 is Verdict.Convergent and at_56 in (Verdict.Divergent, Verdict.Borderline))
    record(9, ok, f"IPS value q*={qv:.4f}, IPS gradient q*={qg:.4f}, SBB value q*={qb:.4f}, "
                  f"SBB gradient q=0.8 {at_08.value}, q=5/6 {at_56.value}")


def test_criterion_10_pointwise_rate():
    ips = pointwise_rate_detect(InfinitePointSource(M2, zero_extended=True), 0.0, 1.0, t0=0.0)
    sbb = pointwise_rate_detect(SingularBarenblatt(M2, zero_extended=True, c=normalize_mass(M2)), 0.0, 1.0, t0=0.0)
    ok = ips.verdict is RateVerdict.PositiveRate and abs(ips.rate_estimate / 0.75 - 1) <= 0.01
    ok = ok and sbb.verdict is RateVerdict.ZeroRate
    record(10, ok, f"IPS rate {ips.rate_estimate:.10f} {ips.verdict.value}; SBB {sbb.verdict.value} (slope {sbb.slope:.2f})")


def test_criterion_11_harnack():
    sbb = SingularBarenblatt(M2, c=normalize_mass(M2))
    rep = constant_sweep(sbb, self_similar_probes(M2, r=0.25, s=1.0, scales=5))
    const = [weak_harnack_probe(ConstantField(K, 2, 1.5), HarnackProbe(0.0, r, 1.0, c2)).admissible_c1
             for K in (0.5, 3.0) for r in (0.1, 1.0) for c2 in (0.05, 0.5)]
    ok = rep.min > 0 and rep.spread <= 2 and all(c == 1.0 for c in const)
    record(11, ok, f"Barenblatt c1 over 5 scales {[round(c, 6) for c in rep.admissible_c1]}, max/min {rep.spread:.6f}; "
                   f"constant fields c1 {sorted(set(const))}")


def _truncated_ips(J, K):
    grid = RadialGrid.uniform(2, 0.05, 0.95, J)
    ts = np.linspace(0.5, 1.5, K + 1)
    u = solve(M2, grid, ts, *traces_from(InfinitePointSource(M2), grid, ts))
    return pointwise_min(u, 10.0)


def test_criterion_12_inequality_sides():
    phi = CutoffFn.annulus(0.1, 0.2, 0.6, 0.9, 0.5, 1.5)
    m = 1.5 * 0.7 / (0.7 - 0.5)
    cac, sob = [], []
    for J, K in ((90, 20), (180, 40)):
        fld = _truncated_ips(J, K)
        cac.append(caccioppoli_sides(fld, phi, 0.3)["constant"])
        sob.append(sobolev_sides(fld, phi, m)["constant"])
    dc, ds = abs(cac[1] / cac[0] - 1), abs(sob[1] / sob[0] - 1)
    record(12, dc <= 0.2 and ds <= 0.2, f"Caccioppoli constants {cac[0]:.4f} -> {cac[1]:.4f} ({dc:.1%}), "
                                        f"Sobolev constants {sob[0]:.5f} -> {sob[1]:.5f} ({ds:.1%})")
