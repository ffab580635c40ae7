"""Acceptance criteria 1-10, each at its stated tolerance and time budget.

Every test prints one ``criterion N: PASS|FAIL ...`` line (visible with
``pytest -s`` or in the verbose log) before asserting.
"""
import math
import time

import numpy as np
import pytest

from cknlab.flow import (FlowGrid, consistency_violations, default_sweep_config, evolve,
                         random_init, sweep)
from cknlab.fields import (AnnulusGrid, AxiPolarGrid, QuadraticField, ScalarField,
                           k_functional, random_trig_field)
from cknlab.geometry import (OffsetBall, OriginBall, ball_criterion, condition_margin,
                             conformal_ii, mapped_surface_ii, surface_data)
from cknlab.identities import (boundary_layer_J, energy_identity, pointwise_k_bound,
                               verify_lemma22, verify_prop21)
from cknlab.params import (GeneralizedPolynomial, OneMinusPower, PowerMinusLinear,
                           classify_regime, derive_parameters)
from cknlab.radial import (check_asymptotics, ef_transform, probe_field, scan_solutions,
                           shoot)
from cknlab.errors import AdmissibilityError

P_MAIN = derive_parameters(3, 0.25, 0.3)
P_SYM = derive_parameters(3, 0.2, 0.2)
F5 = OneMinusPower(5)
NEG = GeneralizedPolynomial([(-1.0, 0.0), (-1.0, 1.0)])


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail, elapsed, budget):
        ok = bool(ok) and elapsed < budget
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} {detail} "
                  f"[{elapsed:.1f}s / {budget:g}s]")
        return ok
    return emit


def test_criterion_1_parameter_algebra(report, rng):
    t0 = time.perf_counter()
    p = P_MAIN
    got = (p.q, p.n, p.alpha, p.alpha_fs, p.sqrt_lambda)
    want = (60 / 11, 60 / 19, 19 / 44, math.sqrt(38 / 41), 0.25)
    errs = [abs(g - w) for g, w in zip(got, want)]
    # alpha_FS is quoted to six digits
    ok_values = max(errs) <= 1e-12 and abs(p.alpha_fs - 0.962719) < 1e-6
    bad, count = 0, 0
    while count < 10_000:
        d = int(rng.integers(3, 8))
        a = rng.uniform(-2.0, d / 2.0 - 1.0)
        b = a + rng.uniform(0.0, 1.0)
        try:
            q = derive_parameters(d, a, b)
        except AdmissibilityError:
            continue
        count += 1
        reg = classify_regime(q)
        if q.n < d or (reg.strong and not reg.fs_symmetric):
            bad += 1
    elapsed = time.perf_counter() - t0
    ok = report(1, ok_values and bad == 0,
                f"max value error {max(errs):.1e}, {bad}/{count} invariant failures",
                elapsed, 1.0)
    assert ok


def test_criterion_2_ball_criterion(report, rng):
    t0 = time.perf_counter()
    disagree, done = 0, 0
    while done < 1000:
        R = rng.uniform(0.3, 3.0)
        alpha = rng.uniform(0.05, 1.0)
        x0 = rng.uniform(0.0, 2.5 * R)
        if abs(x0 - R) < 1e-6 * R:
            continue
        w = rng.normal(size=3)
        b = OffsetBall(x0 * w / np.linalg.norm(w), R) if x0 > 0 else OriginBall(R)
        brute = condition_margin(b, alpha, sampling=10).min_margin >= -1e-9
        disagree += brute != ball_criterion(x0, R, alpha)
        done += 1
    elapsed = time.perf_counter() - t0
    assert report(2, disagree == 0, f"{disagree} disagreements in {done} triples",
                  elapsed, 30.0)


def test_criterion_3_conformal_ii(report, rng):
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        R, alpha = rng.uniform(0.2, 3.0), rng.uniform(0.05, 1.0)
        s = surface_data(OriginBall(R), rng.normal(size=3))
        want = alpha * R ** (alpha - 2.0) * np.eye(2)
        got = conformal_ii(s.ii, s.x, s.nu, alpha)
        worst = max(worst, float(np.max(np.abs(got - want)) / np.max(np.abs(want))))
    # independent route: curvature of the mapped surface by differences
    fd = []
    for b in (OriginBall(1.3), OffsetBall((0.2, -0.1, 0.4), 1.0)):
        for _ in range(5):
            w, alpha = rng.normal(size=3), rng.uniform(0.3, 1.0)
            s = surface_data(b, w)
            ref = conformal_ii(s.ii, s.x, s.nu, alpha)
            e1 = np.max(np.abs(mapped_surface_ii(b, w, alpha, h=2e-3) - ref))
            e2 = np.max(np.abs(mapped_surface_ii(b, w, alpha, h=1e-3) - ref))
            fd.append((e1, e2))
    fd_ok = all(e2 <= 1e-5 and (e2 <= e1 or e2 <= 1e-8) for e1, e2 in fd)
    elapsed = time.perf_counter() - t0
    assert report(3, worst <= 1e-8 and fd_ok,
                  f"closed form rel err {worst:.1e}, mapped-surface max err "
                  f"{max(e for _, e in fd):.1e}", elapsed, 60.0)


def test_criterion_4_differential_identity(report, rng):
    t0 = time.perf_counter()
    p = P_MAIN
    g = AnnulusGrid(3, 0.5, 1.0, 0.05, order=2)
    ratios = []
    for _ in range(20):
        v = ScalarField.from_function(g, random_trig_field(rng, 3), positive=True)
        r = verify_lemma22(v, p)
        ratios.append(r.details["ratio"])
    ones = verify_lemma22(ScalarField.from_function(g, lambda x: np.full(x.shape[:-1], 1.0),
                                                    positive=True), p)
    # the quadratic on the exact-derivative route (rounding level)
    quad = verify_lemma22(QuadraticField(1.3, 2.0, p.alpha), p, route="exact",
                          points=AnnulusGrid(3, 0.5, 1.0, 0.1).points())
    ok = (all(3.2 <= x <= 4.8 for x in ratios) and ones.max_residual <= 1e-12
          and quad.passed)
    elapsed = time.perf_counter() - t0
    assert report(4, ok, f"halving ratios in [{min(ratios):.2f}, {max(ratios):.2f}], "
                  f"v=1 residual {ones.max_residual:.1e}, quadratic residual "
                  f"{quad.max_residual:.1e}", elapsed, 300.0)


def test_criterion_5_equality_pin(report, rng):
    t0 = time.perf_counter()
    p = P_SYM
    g = AnnulusGrid(3, 0.5, 1.0, 0.05, order=4)
    v = ScalarField.from_function(g, QuadraticField(1.0, 2.0, p.alpha), positive=True)
    k = k_functional(v, p)
    from cknlab.fields import jet_quantities, cartesian_jet

    x, Dv, D2v = cartesian_jet(v)
    q = jet_quantities(x[g.mask], Dv[g.mask], D2v[g.mask], p.alpha, p.n)
    scale = float(max(np.max(np.abs(q.hess_sq)), np.max(q.Lv**2) / p.n))
    kmax = float(np.nanmax(np.abs(k.values[g.mask])))
    assert classify_regime(p).strong
    pts = AnnulusGrid(3, 0.5, 1.0, 0.1).points()
    slacks = [pointwise_k_bound(random_trig_field(rng, 3), p, points=pts, tolerance=1e-8)
              for _ in range(50)]
    ok = kmax <= 1e-6 * scale and all(s.passed for s in slacks)
    elapsed = time.perf_counter() - t0
    assert report(5, ok, f"quadratic max|k| {kmax:.1e} (scale {scale:.2f}), "
                  f"{sum(s.passed for s in slacks)}/50 bound checks, worst relative slack "
                  f"{min(s.min_slack / s.details['scale'] for s in slacks):.2e}",
                  elapsed, 300.0)


def test_criterion_6_symmetric_ball(report):
    t0 = time.perf_counter()
    p = P_SYM
    assert p.alpha <= p.alpha_fs
    scans = [scan_solutions(p, F5, 1.0, (0.05, 20.0), grid=n) for n in (200, 400)]
    scan_ok = all(len(s) == 1 and s[0].is_constant and abs(s[0].u0 - 1.0) <= 1e-9
                  for s in scans)
    grid = FlowGrid(p, OriginBall(1.0), 16, 16)
    finals = []
    for seed in range(20):
        init = random_init(grid, np.random.default_rng(seed), mean=1.0, amplitude=0.5)
        res = evolve(p, F5, OriginBall(1.0), init, grid=grid)
        finals.append((res.classification, res.mean))
    flow_ok = all(c == "Constant" and abs(m - 1.0) <= 1e-4 for c, m in finals)
    elapsed = time.perf_counter() - t0
    assert report(6, scan_ok and flow_ok,
                  f"scan roots {[[round(s.u0, 9) for s in sc] for sc in scans]}, "
                  f"{sum(c == 'Constant' for c, _ in finals)}/20 flows Constant, max "
                  f"|mean-1| {max(abs(m - 1) for _, m in finals):.1e}", elapsed, 600.0)


def test_criterion_7_integral_identity(report):
    t0 = time.perf_counter()
    p = P_SYM
    const = scan_solutions(p, F5, 1.0, (0.05, 20.0), grid=200)[0]
    rc = verify_prop21(const, None, F5)
    const_ok = (rc.passed and abs(rc.lhs) <= max(rc.tolerance, 1e-14)
                and abs(rc.rhs) <= max(rc.tolerance, 1e-14))
    lin_ni = []
    for mu in (2.0, 8.0):
        spec = PowerMinusLinear(5, mu)
        rep = scan_solutions(p, spec, 1.0, (0.05, 20.0), grid=200)
        for sol in rep.nonconstant:
            r = verify_prop21(sol, None, spec)
            # with Phi' <= 0 the k integral could not be positive; here Phi'
            # changes sign and the k integral is positive
            lin_ni.append((rep.phi_gate, r.passed, r.bulk_k > r.tolerance, r.residual,
                           r.tolerance))
    ok = const_ok and lin_ni and all(g == "Violated" and agree and pos
                                     for g, agree, pos, _, _ in lin_ni)
    elapsed = time.perf_counter() - t0
    assert report(7, ok, f"constant sides {rc.lhs:.1e}/{rc.rhs:.1e}; Lin-Ni "
                  f"{len(lin_ni)} solutions, residual/budget "
                  f"{[f'{r:.1e}/{t:.1e}' for *_, r, t in lin_ni]}, k integral positive",
                  elapsed, 600.0)


def test_criterion_8_asymptotics(report):
    t0 = time.perf_counter()
    p = P_MAIN
    sol = shoot(p, F5, 1.0, 0.9)
    rep = check_asymptotics(sol)
    rate = ef_transform(sol).decay_rate()
    rate_ok = abs(rate - 0.25) <= 0.05 * 0.25
    # item (2) is identically zero for a radial field; the probe field adds
    # an angular mode annihilated by the linearised operator
    probe = ScalarField.from_function(AxiPolarGrid(0.0, 1.0, 81, 41), probe_field(sol, 1e-2),
                                      positive=True)
    prep = check_asymptotics(probe, p)
    J = boundary_layer_J(sol)
    ok = (rate_ok and rep.passed and prep.items_pass["item2"]
          and prep.exponents["item2"] >= 1.7 and J.beta >= p.n - 2.0 - 0.3)
    elapsed = time.perf_counter() - t0
    assert report(8, ok, f"decay rate {rate:.4f} (sqrt Lambda 0.25), exponents "
                  f"{ {k: round(v, 3) for k, v in rep.exponents.items()} }, probe item2 "
                  f"{prep.exponents['item2']:.3f}, J exponent {J.beta:.3f} >= "
                  f"{p.n - 2.3:.3f}", elapsed, 300.0)


def test_criterion_9_grand_consistency(report, tmp_path):
    t0 = time.perf_counter()
    cfg = default_sweep_config()
    rows = sweep(cfg, tmp_path / "runs.jsonl")
    bad = consistency_violations(rows)
    offsets = {r["config"]["offset"] for r in rows}
    alphas = sorted({r["alpha"] for r in rows})
    crosses = any(o < a * cfg["R"] for o in offsets for a in alphas) and any(
        a * cfg["R"] < o < cfg["R"] for o in offsets for a in alphas)
    gates = {r["gates"]["phi_gate"] for r in rows}
    # the flow never settles on a pattern, so add the radial patterns found
    # by shooting: each must sit outside every nonexistence theorem
    from cknlab.flow import gate_record

    pattern_gates = []
    for mu in (2.0, 8.0):
        spec = PowerMinusLinear(5, mu)
        for sol in scan_solutions(P_SYM, spec, 1.0, (0.05, 20.0), grid=200).nonconstant:
            pattern_gates.append(gate_record(P_SYM, spec, OriginBall(1.0)).all_satisfied)
    ok = (len(rows) >= 200 and not bad and crosses and gates == {"NonIncreasing", "Violated"}
          and pattern_gates and not any(pattern_gates))
    counts = {}
    for r in rows:
        key = r["classification"] if not r.get("note") else f"{r['classification']}:{r['note']}"
        counts[key] = counts.get(key, 0) + 1
    elapsed = time.perf_counter() - t0
    assert report(9, ok, f"{len(rows)} runs, {len(bad)} violations, outcomes {counts}; "
                  f"{len(pattern_gates)} shooting patterns, all gated out", elapsed, 7200.0)


def test_criterion_10_negative_nonlinearity(report):
    t0 = time.perf_counter()
    residuals, solutions = [], []
    for ab in ((0.2, 0.2), (0.25, 0.3), (0.0, 0.0)):
        p = derive_parameters(3, *ab)
        for u0 in (0.3, 0.9, 2.0):
            e = energy_identity(shoot(p, NEG, 1.0, u0), require_neumann=False)
            residuals.append(e.residual)
        solutions += list(scan_solutions(p, NEG, 1.0, (0.05, 20.0), grid=100))
    ok = max(residuals) <= 1e-8 and all(s.is_constant for s in solutions)
    elapsed = time.perf_counter() - t0
    assert report(10, ok, f"max energy residual {max(residuals):.1e}, "
                  f"{len(solutions)} solutions returned (all constant)", elapsed, 60.0)
