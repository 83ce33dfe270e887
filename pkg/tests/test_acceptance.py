"""Acceptance suite: one test per criterion, each printing a single CRITERION line.

Everything runs at the desk-scale defaults (N=128, dt=1e-3, T=10 for the ODE
systems and T=1 for the PDE systems). Where the 4th-order stencil's truncation
sits above a tolerance, the finer-grid value is printed next to the verdict as
a diagnostic only; it never decides the verdict.
"""

import json

import numpy as np
import pytest

from epred import cli
from epred.actions import (
    ActionKind,
    act_infinitesimal,
    cocycle_eval,
    dc_eval,
    dc_transpose,
    diamond,
    infinitesimal_generator,
    momentum_map,
    pair_parameter,
)
from epred.algebra import AlgElem, ad_star, compose, gauge_so3, group_ad, pair, rotation
from epred.dynamics import EPState, EquationFamily, advect_rhs, conservation_report, forcing, integrate
from epred.invariance import (
    check_derivative_equivariance,
    check_lagrangian_invariance,
    check_residual_equivariance,
    check_solution_transport,
)
from epred.lagrangian import builtin_lagrangians
from epred.systems import build_system, negative_controls, reference_rhs

from conftest import random_alg, smooth_field
from test_actions import ALL_KINDS, KIND_IDS, brute_force_dual, descriptor, random_covector, random_state

CURVE_TIMES = (0.5, 1.0, 1.5, 2.0)
SEED = 20240611


def announce(capsys, n, ok, text):
    with capsys.disabled():
        print(f"\nCRITERION {n}: {'PASS' if ok else 'FAIL'} {text}")


@pytest.fixture(scope="module")
def trajectories():
    cache = {}

    def get(name, params=None):
        key = (name, json.dumps(params or {}, sort_keys=True))
        if key not in cache:
            s = build_system(name, params)
            t = s.default_time
            cache[key] = (s, integrate(s, *s.default_init(), t["T"], t["dt"]))
        return cache[key]

    return get


# ---------------------------------------------------------------------------
# 1. defining-pairing oracles


def test_criterion_1_pairing_oracles(capsys):
    rng = np.random.default_rng(SEED)
    worst = {}
    for (kind, sigma, affine), label in zip(ALL_KINDS, KIND_IDS):
        d = descriptor(kind, 16, sigma=sigma, affine=affine)
        w = 0.0
        for _ in range(32):
            a, v = random_state(rng, d), random_covector(rng, d)
            jm = brute_force_dual(d.algebra, lambda e: pair_parameter(v, infinitesimal_generator(e, a), d))
            w = max(w, np.max(np.abs(momentum_map(a, v).coords - jm)))
            if kind is not ActionKind.SPHERE_SO3:
                dm = brute_force_dual(d.algebra, lambda e: pair_parameter(v, act_infinitesimal(e, a), d))
                w = max(w, np.max(np.abs(diamond(v, a).coords - dm)))
        worst[label] = w
    d = descriptor(ActionKind.CONNECTION_GAUGE, 16, affine=True)
    w = 0.0
    for _ in range(32):
        alpha = random_covector(rng, d)
        brute = brute_force_dual(d.algebra, lambda e: pair_parameter(alpha, dc_eval(e), d))
        w = max(w, np.max(np.abs(dc_transpose(alpha, d.algebra).coords - brute)))
        x = random_alg(rng, d.algebra)
        w = max(w, abs(pair_parameter(alpha, dc_eval(x), d) - pair(dc_transpose(alpha, d.algebra), x)))
    worst["dc"] = w
    top = max(worst.values())
    ok = top <= 1e-10
    announce(capsys, 1, ok, f"max pairing defect {top:.2e} (tol 1e-10) over {len(worst)} kinds x 32 samples")
    assert ok


# ---------------------------------------------------------------------------
# 2. cocycle identity


def test_criterion_2_cocycle_identity(capsys):
    def worst_defect(n, count=32):
        rng = np.random.default_rng(SEED)
        alg = gauge_so3(n)
        w = 0.0
        for _ in range(count):
            g = rotation(alg, 0.5 * smooth_field(rng, n, 3, modes=2))
            h = rotation(alg, 0.5 * smooth_field(rng, n, 3, modes=2))
            lhs = cocycle_eval(compose(g, h))
            rhs = cocycle_eval(g) + group_ad(g, AlgElem(alg, cocycle_eval(h))).coords
            w = max(w, np.max(np.abs(lhs - rhs)))
        return w

    defect = worst_defect(128)
    fine = worst_defect(512)
    ok = defect <= 1e-8
    announce(capsys, 2, ok, f"cocycle defect {defect:.2e} at N=128 (tol 1e-8); "
                            f"diagnostic N=512: {fine:.2e}, ratio {defect / fine:.0f} (4th order: 256)")
    assert ok


# ---------------------------------------------------------------------------
# 3. equivariance of the analytic derivatives


LAGRANGIAN_SYSTEMS = {
    "heavy_top": ("heavy_top", {}),
    "nematic": ("nematic", {}),
    "nematic_projected": ("nematic_projected", {}),
    "hs1d": ("hs1d", {}),
    "density_hs1d": ("density_hs1d", {}),
    "spin_l1": ("spin_lattice", {"lagrangian": "l1"}),
    "spin_l2": ("spin_lattice", {"lagrangian": "l2"}),
    "spin_l3": ("spin_lattice", {"lagrangian": "l3"}),
}


def test_criterion_3_derivative_equivariance(capsys):
    assert sorted(LAGRANGIAN_SYSTEMS) == sorted(builtin_lagrangians(16))
    rng = np.random.default_rng(SEED)
    worst, where, checks = 0.0, "", 0
    configs = list(LAGRANGIAN_SYSTEMS.items()) + [("lagrange_top", ("heavy_top", {"I": [2.0, 2.0, 1.0]}))]
    for key, (name, params) in configs:
        s = build_system(name, params)
        samples = s.random_samples(rng, 32)
        for path in s.h_paths:
            rep = check_derivative_equivariance(s.lagrangian, path, samples)
            checks += 1
            if rep.max_defect >= worst:
                worst, where = rep.max_defect, f"{key}/{path.name}"
    ok = worst <= 1e-9
    announce(capsys, 3, ok, f"max defect {worst:.2e} (tol 1e-9) over {checks} Lagrangian/path pairs; worst {where}")
    assert ok


# ---------------------------------------------------------------------------
# 4. residual equivariance on non-solution curves


RESIDUAL_CASES = [
    # (system, params, catalog, mode, tolerance)
    ("heavy_top", {}, "g_paths", "transport", 1e-7),
    ("heavy_top", {"I": [2.0, 2.0, 1.0]}, "h_paths", "evaluate", 1e-7),
    ("nematic", {}, "h_paths", "evaluate", 1e-7),
    ("nematic_projected", {}, "h_paths", "evaluate", 1e-7),
    ("hs1d", {}, "h_paths", "evaluate", 1e-6),
    ("density_hs1d", {}, "h_paths", "evaluate", 1e-6),
    ("spin_lattice", {}, "h_paths", "evaluate", 1e-6),
]


def residual_defects(name, params, catalog, mode, n_curves=16):
    s = build_system(name, params)
    rng = np.random.default_rng(SEED)
    curves = [s.random_curve(rng) for _ in range(n_curves)]
    worst, base_min = 0.0, np.inf
    for path in getattr(s, catalog):
        for c in curves:
            rep = check_residual_equivariance(s, path, c, CURVE_TIMES, h=1e-3, mode=mode)
            worst = max(worst, rep.max_defect)
            base_min = min(base_min, rep.details["base_residual_max"])
    return worst, base_min


def test_criterion_4_residual_equivariance(capsys):
    lines, ok = [], True
    for name, params, catalog, mode, tol in RESIDUAL_CASES:
        worst, base_min = residual_defects(name, params, catalog, mode)
        assert base_min > 1e-2  # the curves are genuinely off-shell
        passed = worst <= tol
        ok &= passed
        label = name + ("(I=2,2,1)" if params else "")
        extra = ""
        if not passed and name in ("hs1d", "density_hs1d"):
            fine, _ = residual_defects(name, {"N": 512}, catalog, mode)
            extra = f" [diagnostic N=512: {fine:.1e}]"
        lines.append(f"{label} {worst:.1e}/{tol:.0e}{'' if passed else ' FAIL'}{extra}")
    announce(capsys, 4, ok, "16 curves x 3 paths: " + "; ".join(lines))
    assert ok


# ---------------------------------------------------------------------------
# 5. solution transport


TRANSPORT_CASES = [
    ("hs1d", {}, "h_paths", "evaluate", 1e-5),
    ("density_hs1d", {}, "h_paths", "evaluate", 1e-5),
    ("heavy_top", {}, "g_paths", "transport", 1e-6),
    ("nematic_projected", {}, "h_paths", "evaluate", 1e-6),
    ("spin_lattice", {}, "h_paths", "evaluate", 1e-6),
]


def test_criterion_5_solution_transport(capsys, trajectories):
    lines, ok = [], True
    for name, params, catalog, mode, tol in TRANSPORT_CASES:
        s, traj = trajectories(name, params)
        worst = 0.0
        for path in getattr(s, catalog):
            rep = check_solution_transport(s, path, None, traj.times[-1], traj.dt, mode=mode, trajectory=traj)
            worst = max(worst, rep.max_defect)
        passed = worst <= tol
        ok &= passed
        lines.append(f"{name} {worst:.1e}/{tol:.0e}{'' if passed else ' FAIL'}")
    announce(capsys, 5, ok, "transformed-solution residuals: " + "; ".join(lines))
    assert ok


# ---------------------------------------------------------------------------
# 6. generic family vs explicit equations


def generic_tangent(s, xi, a):
    mu = s.lagrangian.d_xi(xi, a)
    dmu = -ad_star(xi, mu).coords
    if s.family is EquationFamily.PLAIN:
        return dmu, None
    return dmu + forcing(s.family, s.lagrangian, xi, a).coords, advect_rhs(s.family, xi, a)


def reference_gap(name, n=128, count=32):
    s = build_system(name, {"N": n})
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(count):
        xi, a = s.random_xi(rng), s.random_a(rng)
        gen = generic_tangent(s, xi, a)
        ref = reference_rhs(s, EPState(0.0, s.lagrangian.d_xi(xi, a), a), xi)
        for g, r in zip(gen, ref):
            if r is not None:
                worst = max(worst, np.max(np.abs(g - r)) / max(1.0, np.max(np.abs(r))))
    return worst


def test_criterion_6_reference_equations(capsys):
    lines, ok = [], True
    for name in ("hs1d", "density_hs1d", "spin_lattice"):
        gap = reference_gap(name)
        passed = gap <= 1e-8
        ok &= passed
        extra = "" if passed else f" [diagnostic N=2048: {reference_gap(name, 2048, 8):.1e}]"
        lines.append(f"{name} {gap:.1e}{'' if passed else ' FAIL'}{extra}")
    announce(capsys, 6, ok, "relative gap (tol 1e-8), 32 states, N=128: " + "; ".join(lines))
    assert ok


# ---------------------------------------------------------------------------
# 7. conservation


CONSERVATION_LIMITS = {
    "energy": 1e-7,
    "gamma_norm_sq": 1e-9,
    "gamma_dot_mu": 1e-9,
    "sphere_norm": 1e-10,
    "spin_compatibility": 1e-12,
}


def test_criterion_7_conservation(capsys, trajectories):
    lines, ok = [], True
    for name in ("heavy_top", "nematic", "nematic_projected", "hs1d", "density_hs1d", "spin_lattice"):
        s, traj = trajectories(name)
        rep = conservation_report(s, traj)
        for q, lim in CONSERVATION_LIMITS.items():
            if q not in rep:
                continue
            val = rep[q]["max_abs"] if q == "spin_compatibility" else rep[q]["drift"]
            passed = val <= lim
            ok &= passed
            lines.append(f"{name}.{q} {val:.1e}{'' if passed else ' FAIL'}")
    announce(capsys, 7, ok, "; ".join(lines))
    assert ok


# ---------------------------------------------------------------------------
# 8. convergence orders via the sweep command


def sweep(tmp_path, cfg, param, values):
    p = tmp_path / f"{param}.json"
    cfg = dict(cfg, output={"dir": str(tmp_path / param)})
    p.write_text(json.dumps(cfg))
    assert cli.main(["sweep", str(p), "--param", param, "--values", values]) == 0
    rows = json.loads((tmp_path / param / "sweep.json").read_text())["rows"]
    return [r["p"] for r in rows if r["p"] is not None]


def test_criterion_8_convergence_orders(capsys, tmp_path):
    with capsys.disabled():
        p_dt = sweep(tmp_path, {"system": "heavy_top"}, "dt", "4e-3,2e-3,1e-3,5e-4")
        p_n = sweep(tmp_path, {"system": "hs1d"}, "N", "32,64,128")
    ok = (len(p_dt) == 2 and all(abs(p - 4.0) <= 0.2 for p in p_dt)
          and len(p_n) == 1 and all(abs(p - 4.0) <= 0.5 for p in p_n))
    announce(capsys, 8, ok, f"temporal p = {', '.join(f'{p:.3f}' for p in p_dt)} (4.0 +- 0.2); "
                            f"spatial p = {', '.join(f'{p:.3f}' for p in p_n)} (4.0 +- 0.5)")
    assert ok


# ---------------------------------------------------------------------------
# 9. negative controls


def test_criterion_9_negative_controls(capsys):
    rng = np.random.default_rng(SEED)
    lines, ok = [], True
    for ctl in negative_controls():
        s = build_system(ctl.system, ctl.params)
        if ctl.check == "lagrangian_invariance":
            rep = check_lagrangian_invariance(s.lagrangian, ctl.path, s.random_samples(rng, 32),
                                              expected_fail=True)
        else:
            rep = max((check_residual_equivariance(s, ctl.path, s.random_curve(rng), CURVE_TIMES,
                                                   mode=ctl.mode, expected_fail=True) for _ in range(4)),
                      key=lambda r: r.max_defect)
        failed_as_designed = rep.max_defect > 1e-3 and not rep.passed
        ok &= failed_as_designed
        lines.append(f"{ctl.name} {rep.max_defect:.2e}")
    announce(capsys, 9, ok, "control defects (must exceed 1e-3): " + "; ".join(lines))
    assert ok
