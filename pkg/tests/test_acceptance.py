"""Acceptance suite: one test per checklist criterion, each printing a
PASS/FAIL line per sub-item before asserting.

Criterion 1's final verdict assertion is implemented exactly as specified
and is expected to fail: the bundled degenerate instance carries a
certified negative-curvature quadruple (chi2 ~ -0.0261 at
v = +-(-2,1,0)/sqrt(5), multiplier (-6/sqrt(35), 1/sqrt(35), 1)) and its
tilted argmin is two-valued along a tilt ray into the origin (exact
symmetry (x1,x2,x3) -> (x1,-x1-x2,x3) ties the two wells), so the point
is genuinely not tilt-stable and TILT_STABLE is unattainable.  See the
project decision notes for the full analysis.
"""

import time

import numpy as np
import pytest

from _oracles import (grid_max_linear, grid_rho, random_quadratic_instance)
from socptilt import analyzer, conelp, harness, secondorder
from socptilt.cone import dual_contains, hat, project_onto_cone, \
    project_onto_cone_batch
from socptilt.instances import degenerate_quadratic, identity_cone
from socptilt.model import ProblemInstance
from socptilt.poly import Polynomial, quadratic

S15 = np.sqrt(15.0)
LAM_TILDE = np.array([-4 / S15, 1 / S15, 1.0])


def _line(crit, name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {crit} [{status}] {name}" + (f" — {detail}" if detail else ""))
    return ok


def test_criterion_1_degenerate_end_to_end():
    t0 = time.perf_counter()
    inst = degenerate_quadratic()
    results = []

    case, _ = analyzer.classify_case(inst)
    results.append(_line(1, "case classification is in_kernel",
                         case == "in_kernel"))

    sl = inst.multiplier_slice()
    ok_lambda = True
    for b in np.linspace(-4.0, 4.0, 100):
        lam = np.array([-np.sqrt(b * b + 1.0), b, 1.0])
        ok_lambda &= sl.affine_residual(lam) <= 1e-9
        ok_lambda &= dual_contains(lam, 1e-12)
        ok_lambda &= abs(lam[0] + np.linalg.norm(lam[1:])) <= 1e-12  # boundary
        ok_lambda &= dual_contains(np.array([lam[0] - 0.1, b, 1.0]), 0.0)
        ok_lambda &= not dual_contains(np.array([lam[0] + 0.1, b, 1.0]), 0.0)
    results.append(_line(1, "multiplier set {(a,b,1): a <= -sqrt(b^2+1)} "
                            "recovered on 100 sampled b", ok_lambda))

    res = secondorder.directional_multipliers(inst, [1, 0, 0])
    err = float(np.abs(res.argmax - LAM_TILDE).max())
    results.append(_line(1, "directional multiplier at v=(1,0,0) within 1e-8",
                         err <= 1e-8, f"err={err:.2e}"))

    simp = analyzer.simplified_check(inst, budget=96)
    hits = [w for w in simp.witnesses
            if np.linalg.norm(w["lam"] - LAM_TILDE) <= 1e-6
            and abs(abs(w["u"][1]) - 1.0) <= 1e-6 and abs(w["value"]) <= 1e-8]
    results.append(_line(1, "simplified test fails at lam~ with u=(0,+-1,0), "
                            "|form| <= 1e-8", (not simp.passes) and bool(hits)))

    r = secondorder.rho(inst, [0, 1, 0], LAM_TILDE, [1, 0, 0])
    results.append(_line(1, "rho((0,1,0), lam~, (1,0,0)) > 1e-4",
                         r.value > 1e-4, f"rho={r.value:.6f}"))

    verdict = analyzer.analyze(inst, budget=96)
    elapsed = time.perf_counter() - t0
    results.append(_line(1, "runtime < 30 s", elapsed < 30.0,
                         f"{elapsed:.1f}s"))
    ok_verdict = _line(
        1, "final verdict TILT_STABLE", verdict.verdict == "TILT_STABLE",
        f"got {verdict.verdict}, chi=("
        f"{verdict.chi['chi1'].value:.4f}, {verdict.chi['chi2'].value:.4f}, "
        f"{verdict.chi['chi3'].value:.4f})")
    results.append(ok_verdict)

    assert all(results[:-1]), "a sub-criterion other than the verdict failed"
    assert ok_verdict, (
        "required final verdict TILT_STABLE is unattainable: the instance "
        "admits a certified negative quadruple certificate (chi2 = "
        f"{verdict.chi['chi2'].value:.6f} < 0 at v = +-(-2,1,0)/sqrt(5)) and "
        "its tilted argmin is two-valued arbitrarily close to the zero tilt "
        "(exact symmetry tie), i.e. the point is not tilt-stable; see the "
        "decision notes")


def test_criterion_2_out_of_kernel_instance():
    t0 = time.perf_counter()
    inst = identity_cone()
    results = []

    out, u = conelp.out_of_kernel_probe(inst)
    d = u / np.linalg.norm(u)
    results.append(_line(2, "probe returns out-of-kernel with u ~ (1,1,0)",
                         out and np.abs(d - np.array([1, 1, 0]) / np.sqrt(2)).max() <= 1e-6))

    lb = secondorder.lambda_bar(inst, u)
    err = float(np.abs(lb - np.array([-1.0, 1.0, 0.0])).max())
    results.append(_line(2, "lambda_bar = (-1,1,0) within 1e-10", err <= 1e-10,
                         f"err={err:.2e}"))

    verdict = analyzer.analyze(inst, budget=64)
    ok_v = verdict.verdict == "TILT_STABLE" and \
        abs(verdict.bound_estimate - 1.0) <= 1e-6
    results.append(_line(2, "verdict TILT_STABLE with bound 1.0 +- 1e-6", ok_v,
                         f"bound={verdict.bound_estimate}"))

    exp = harness.empirical_tilt(inst, gamma=0.1, r_tilt=1e-3,
                                 kappa_theory=verdict.bound_estimate)
    ok_mod = 0.5 <= exp.modulus_estimate <= 1.25
    results.append(_line(2, "empirical modulus in [0.5, 1.25]", ok_mod,
                         f"modulus={exp.modulus_estimate:.4f}"))

    # oracle cross-check: closed-form KKT solve is the cone projection
    seeds = harness._feasible_seeds(inst, 0.1, seed=inst.seed)
    rng = np.random.default_rng(11)
    c = np.array([1.0, -1.0, 0.0])
    ok_oracle = True
    for _ in range(5):
        v = 1e-3 * rng.standard_normal(3)
        x, _ = harness.solve_tilted(inst, v, gamma=0.1, seeds=seeds)
        ok_oracle &= np.linalg.norm(x - project_onto_cone(v - c)) <= 1e-5
    results.append(_line(2, "tilted solutions match the closed-form "
                            "projection oracle", ok_oracle))

    elapsed = time.perf_counter() - t0
    results.append(_line(2, "runtime < 60 s", elapsed < 60.0, f"{elapsed:.1f}s"))
    assert all(results)


def test_criterion_3_property_suite():
    t0 = time.perf_counter()
    rng = np.random.default_rng(33)
    results = []

    # projection idempotence and obtuseness, 1e4 trials
    P = rng.standard_normal((10000, 4)) * rng.uniform(0.1, 5.0, (10000, 1))
    proj = project_onto_cone_batch(P)
    idem = float(np.max(np.linalg.norm(project_onto_cone_batch(proj) - proj,
                                       axis=1)))
    obtuse = float(np.max(np.abs(np.einsum("ij,ij->i", P - proj, proj))))
    results.append(_line(3, "projection idempotence <= 1e-10 (1e4 trials)",
                         idem <= 1e-10, f"max={idem:.2e}"))
    results.append(_line(3, "projection obtuseness <= 1e-10 (1e4 trials)",
                         obtuse <= 1e-10, f"max={obtuse:.2e}"))

    # rho nonnegativity on dual-cone multipliers, 1e4 trials
    insts = [random_quadratic_instance(rng, n=int(rng.integers(2, 4)), m=2)
             for _ in range(20)]
    rho_min = np.inf
    for inst in insts:
        for _ in range(500):
            lam = hat(project_onto_cone(rng.standard_normal(3) * 2))
            r = secondorder.rho(inst, rng.standard_normal(inst.n), lam,
                                rng.standard_normal(inst.n))
            if np.isfinite(r.value):
                rho_min = min(rho_min, r.value)
    results.append(_line(3, "rho >= -1e-9 on 1e4 dual-cone draws",
                         rho_min >= -1e-9, f"min={rho_min:.2e}"))

    # rho against the dense constraint-grid oracle (h = 0.01, radius 5)
    worst = 0.0
    n_checked = 0
    while n_checked < 300:
        n = int(rng.integers(2, 4))
        inst = random_quadratic_instance(rng, n=n, m=int(rng.integers(1, 3)),
                                         box=0.6)
        lam = hat(project_onto_cone(rng.standard_normal(1 + inst.m)))
        if np.linalg.norm(inst.J_base.T @ lam) <= 1e-6:
            continue
        u = rng.standard_normal(inst.n)
        v = rng.standard_normal(inst.n)
        r = secondorder.rho(inst, u, lam, v)
        if not np.isfinite(r.value) or (r.z is not None and
                                        np.max(np.abs(r.z)) > 3.0):
            continue
        oracle = grid_rho(inst, u, lam, v, box=5.0, h=0.01)
        worst = max(worst, abs(r.value - oracle))
        n_checked += 1
    results.append(_line(3, "rho matches the dense-grid oracle within 1e-3 "
                            "(300 instances, n <= 3)", worst <= 1e-3,
                         f"worst={worst:.2e}"))

    # curvature nonnegativity on critical pairs, 1e4 trials
    inst = identity_cone()
    J = inst.J_base
    worst_H = 0.0
    checked = 0
    while checked < 10000:
        x = project_onto_cone(rng.standard_normal(3))
        gx = inst.g_value(x)
        if np.linalg.norm(gx) < 1e-8 or \
                abs(gx[0] - np.linalg.norm(gx[1:])) > 1e-12:
            continue
        lam = rng.uniform(0, 2) * hat(gx)
        y = J.T @ lam
        u = rng.standard_normal(3)
        u -= y * (y @ u) / max(y @ y, 1e-300)
        q = J @ u
        if gx[1:] @ q[1:] / np.linalg.norm(gx[1:]) - q[0] > 0:
            continue
        H = secondorder.curvature_from_parts(lam, gx, J)
        worst_H = min(worst_H, float(u @ H @ u))
        checked += 1
    results.append(_line(3, "curvature form >= -1e-9 on 1e4 critical pairs",
                         worst_H >= -1e-9, f"min={worst_H:.2e}"))

    # two-regularity agrees with 20-target solvability probing, 1e4 trials
    agree = 0
    for k in range(10000):
        n = int(rng.integers(2, 5))
        m = int(rng.integers(1, 3))
        g = []
        for _ in range(1 + m):
            terms = []
            for _ in range(6):
                e = [0] * n
                for _ in range(int(rng.integers(1, 4))):
                    e[rng.integers(0, n)] += 1
                terms.append((float(rng.uniform(-1, 1)), tuple(e)))
            g.append(Polynomial.from_terms(terms, n))
        inst_k = ProblemInstance(n=n, m=m, f=quadratic(n, Q=np.eye(n)),
                                 g=tuple(g), x_base=np.zeros(n), sigma=1.0)
        v = rng.standard_normal(n)
        reg = secondorder.two_regular(inst_k, v)
        Jk = inst_k.J_base
        Sv = np.einsum("ijk,j->ik", inst_k.g_hess_base, v)
        Pk = secondorder._null_basis(Jk, 1e-8)
        M = np.hstack([Jk, Sv @ Pk]) if Pk.size else Jk
        solvable = True
        for _ in range(20):
            p = rng.standard_normal(1 + m)
            sol, *_ = np.linalg.lstsq(M, p, rcond=None)
            if np.linalg.norm(M @ sol - p) > 1e-7:
                solvable = False
                break
        agree += int(reg == solvable)
    results.append(_line(3, "two_regular agrees with solvability probing "
                            "(1e4 trials)", agree == 10000, f"{agree}/10000"))

    elapsed = time.perf_counter() - t0
    results.append(_line(3, "runtime < 5 min", elapsed < 300.0,
                         f"{elapsed:.1f}s"))
    assert all(results)


def test_criterion_4_subsolver_oracle_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(44)
    worst = 0.0
    n_checked = 0
    while n_checked < 200:
        m = int(rng.integers(1, 4))
        inst = random_quadratic_instance(rng, n=int(rng.integers(2, 5)), m=m)
        sl = inst.multiplier_slice()
        if sl.empty or sl.dim > 2:
            continue
        c_obj = rng.standard_normal(1 + m)
        res = conelp.maximize_linear(sl, c_obj, seed=0)
        if res.status != "optimal":
            continue
        val, _ = grid_max_linear(sl, c_obj)
        if val is None:
            continue
        worst = max(worst, abs(res.value - val) / (1 + abs(val)))
        assert sl.contains(res.argmax, 1e-8)
        n_checked += 1
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6
    _line(4, "200 random instances, grid-oracle value agreement 1e-6", ok,
          f"worst={worst:.2e}, {elapsed:.1f}s")
    assert ok


def test_criterion_5_no_gap_consistency():
    t0 = time.perf_counter()
    rng = np.random.default_rng(55)
    n_stable = n_not = n_inc = 0
    failures = []
    for k in range(50):
        inst = random_quadratic_instance(rng, box=0.8)
        verdict = analyzer.analyze(inst, budget=64, with_simplified=False)
        if verdict.verdict == "TILT_STABLE":
            n_stable += 1
            bound = verdict.bound_estimate
            kappa = 1.01 * bound if bound and bound > 0 else 1e6
            witness = harness.neighborhood_falsify(inst, kappa=kappa,
                                                   eta=1e-2, samples=10000)
            if witness is not None:
                failures.append((k, "TILT_STABLE but neighborhood witness",
                                 witness["value"], 1.0 / kappa))
        elif verdict.verdict == "NOT_TILT_STABLE":
            n_not += 1
            exp = harness.empirical_tilt(inst, gamma=0.1, r_tilt=1e-4,
                                         grid_size=5, witness=verdict.witness)
            if exp.modulus_estimate < 1e3 and not exp.unstable:
                failures.append((k, "NOT_TILT_STABLE but bounded modulus",
                                 exp.modulus_estimate, None))
        else:
            n_inc += 1
    elapsed = time.perf_counter() - t0
    ok = not failures
    _line(5, "no-gap consistency on 50 random instances", ok,
          f"stable={n_stable}, not={n_not}, inconclusive={n_inc}, "
          f"failures={failures}, {elapsed:.0f}s")
    assert ok, failures
