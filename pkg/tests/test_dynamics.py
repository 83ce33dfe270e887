import dataclasses

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from epred.actions import AdvectedState
from epred.algebra import AlgElem, DualElem, ad_star, pair
from epred.dynamics import (
    EPState,
    EquationFamily,
    FamilyMismatch,
    IntegrationAbort,
    advect_rhs,
    advection_residual,
    check_family,
    conservation_report,
    conserved_quantities,
    ep_residual,
    integrate,
)
from epred.invariance import CurvePair, spline_curve
from epred.lagrangian import HunterSaxtonLagrangian
from epred.systems import build_system

E1, E2, E3 = np.eye(3)


def heavy_top_oracle(inertia, lam, omega0, gamma0, times):
    """Independent high-order solution of the heavy-top equations in (mu, Gamma)."""
    inertia, lam = np.asarray(inertia, float), np.asarray(lam, float)

    def f(t, y):
        mu, g = y[:3], y[3:]
        om = mu / inertia
        return np.r_[np.cross(om, mu) + np.cross(lam, g), np.cross(om, g)]

    y0 = np.r_[inertia * omega0, gamma0]
    sol = solve_ivp(f, (0, times[-1]), y0, method="DOP853", rtol=1e-13, atol=1e-14, t_eval=times)
    return sol.y.T


@pytest.fixture(scope="module")
def heavy_top_run():
    s = build_system("heavy_top")
    return s, integrate(s, *s.default_init(), T=10.0, dt=1e-3)


class TestFamilies:
    def test_compatibility(self):
        ht = build_system("heavy_top")
        check_family(EquationFamily.ADVECTED, ht.action)
        with pytest.raises(FamilyMismatch):
            check_family(EquationFamily.AFFINE, ht.action)
        with pytest.raises(FamilyMismatch):
            check_family(EquationFamily.BREAKING, ht.action)
        with pytest.raises(FamilyMismatch):
            check_family(EquationFamily.PLAIN, ht.action)
        check_family(EquationFamily.PLAIN, None)
        check_family(EquationFamily.BREAKING, build_system("nematic").action)
        check_family(EquationFamily.AFFINE, build_system("spin_lattice", {"N": 8}).action)

    def test_residual_family_mismatch(self):
        s = build_system("heavy_top")
        curve = CurvePair(lambda t: AlgElem(s.algebra, E1), lambda t: AdvectedState(s.action, E3))
        with pytest.raises(FamilyMismatch):
            ep_residual(EquationFamily.AFFINE, s.lagrangian, curve, 0.0, 1e-3)
        with pytest.raises(FamilyMismatch):
            ep_residual(EquationFamily.PLAIN, s.lagrangian, curve, 0.0, 1e-3)


class TestResidual:
    def test_hs1d_kernel_direction(self):
        s = build_system("hs1d", {"N": 32})
        curve = CurvePair(lambda t: AlgElem(s.algebra, np.full(32, 0.7)))
        r = ep_residual(EquationFamily.PLAIN, s.lagrangian, curve, 0.3, 1e-3)
        assert r.norm() == 0.0

    def test_sleeping_top(self):
        s = build_system("heavy_top", {"I": [1, 2, 3], "lambda": [0, 0, 1]})
        curve = CurvePair(lambda t: AlgElem(s.algebra, 2.5 * E3), lambda t: AdvectedState(s.action, E3))
        assert ep_residual(s.family, s.lagrangian, curve, 0.5, 1e-3).norm() <= 1e-12
        assert np.max(np.abs(advection_residual(s.family, curve, 0.5, 1e-3))) <= 1e-12

    def test_non_solution_is_detected(self):
        s = build_system("heavy_top")
        curve = CurvePair(lambda t: AlgElem(s.algebra, [np.cos(t), 0.3, 0.0]),
                          lambda t: AdvectedState(s.action, E3))
        assert ep_residual(s.family, s.lagrangian, curve, 0.5, 1e-3).norm() > 0.1

    def test_integrated_trajectory_residual(self, heavy_top_run):
        s, traj = heavy_top_run
        curve = spline_curve(traj)
        worst = 0.0
        for t in np.linspace(0.5, 9.5, 25):
            worst = max(worst, ep_residual(s.family, s.lagrangian, curve, t, traj.dt).norm(),
                        float(np.max(np.abs(advection_residual(s.family, curve, t, traj.dt)))))
        assert worst <= 1e-6


class TestAdvectRhs:
    def test_zero_velocity(self):
        s = build_system("heavy_top")
        out = advect_rhs(s.family, AlgElem.zeros(s.algebra), AdvectedState(s.action, [1.0, 2.0, 3.0]))
        assert np.all(out == 0)

    def test_zero_velocity_affine(self, rng):
        s = build_system("spin_lattice", {"N": 16})
        out = advect_rhs(s.family, AlgElem.zeros(s.algebra), s.random_a(rng))
        assert np.all(out == 0)

    def test_sphere(self):
        s = build_system("nematic")
        out = advect_rhs(s.family, AlgElem(s.algebra, E3), AdvectedState(s.action, E1))
        np.testing.assert_allclose(out, E2)


class TestIntegrate:
    @pytest.mark.parametrize("name,params", [("heavy_top", {"lambda": [0, 0, 0]}), ("nematic", {}),
                                             ("nematic_projected", {}), ("hs1d", {"N": 16}),
                                             ("density_hs1d", {"N": 16}), ("spin_lattice", {"N": 16})])
    def test_zero_initial_data(self, name, params):
        s = build_system(name, params)
        traj = integrate(s, *s.zero_init(), T=0.1, dt=0.01)
        assert np.all(traj.mu == 0) and np.all(traj.xi == 0)
        if traj.a is not None:
            np.testing.assert_array_equal(traj.a, np.tile(traj.a[0], (len(traj), 1)))

    def test_energy_drift_heavy_top(self, heavy_top_run):
        s, traj = heavy_top_run
        rep = conservation_report(s, traj)
        assert rep["energy"]["drift"] <= 1e-8
        assert rep["gamma_norm_sq"]["drift"] <= 1e-9
        assert rep["gamma_dot_mu"]["drift"] <= 1e-9

    def test_matches_independent_solver(self, heavy_top_run):
        s, traj = heavy_top_run
        ref = heavy_top_oracle([1, 2, 3], [0, 0, 1], E1, E3, traj.times[::1000])
        got = np.hstack([traj.mu, traj.a])[::1000]
        np.testing.assert_allclose(got, ref, atol=1e-9)

    def test_temporal_order(self):
        s = build_system("heavy_top")
        T = 2.0
        ref = heavy_top_oracle([1, 2, 3], [0, 0, 1], E1, E3, np.array([0.0, T]))[-1]
        errs = []
        for dt in (4e-3, 2e-3, 1e-3):
            traj = integrate(s, *s.default_init(), T=T, dt=dt)
            errs.append(np.max(np.abs(np.r_[traj.mu[-1], traj.a[-1]] - ref)))
        orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all(np.abs(orders - 4.0) <= 0.2), orders

    def test_records_every_step(self):
        s = build_system("heavy_top")
        traj = integrate(s, *s.default_init(), T=0.05, dt=0.01)
        assert len(traj) == 6
        np.testing.assert_allclose(np.diff(traj.times), 0.01)
        assert traj.diagnostics["steps"] == 5

    def test_bad_times(self):
        s = build_system("heavy_top")
        with pytest.raises(ValueError):
            integrate(s, *s.default_init(), T=1.0, dt=0.3)
        with pytest.raises(ValueError):
            integrate(s, *s.default_init(), T=1.0, dt=-0.1)

    def test_non_integrable(self):
        s = build_system("spin_lattice", {"N": 8, "lagrangian": "l1"})
        with pytest.raises(ValueError):
            integrate(s, *s.zero_init(), T=0.1, dt=0.01)

    def test_kernel_drift_aborts(self):
        class Drifting(HunterSaxtonLagrangian):
            def _d_xi(self, xi, a):
                return super()._d_xi(xi, a) + 1e-3

        s = build_system("hs1d", {"N": 16})
        bad = dataclasses.replace(s, lagrangian=Drifting(s.algebra))
        with pytest.raises(IntegrationAbort, match="kernel"):
            integrate(bad, *s.default_init(), T=0.1, dt=0.01)

    def test_density_floor_aborts(self):
        s = build_system("density_hs1d", {"N": 32, "rho_min": 0.9})
        x = s.algebra.grid
        init = s.make_init(1.5 * np.sin(x), 1.0 + 0.05 * np.cos(x))
        with pytest.raises(IntegrationAbort, match="rho_min"):
            integrate(s, *init, T=2.0, dt=1e-2)

    def test_non_finite_aborts(self):
        s = build_system("heavy_top")
        with pytest.raises(IntegrationAbort):
            integrate(s, AlgElem(s.algebra, [1e200, 1e200, 0.0]), AdvectedState(s.action, E3), T=0.1, dt=0.05)


class TestConserved:
    def test_zero_state_is_potential(self, rng):
        s = build_system("heavy_top")
        a = AdvectedState(s.action, rng.normal(size=3))
        q = conserved_quantities(s, EPState(0.0, DualElem.zeros(s.algebra), a))
        assert q["energy"] == pytest.approx(-s.lagrangian.value(AlgElem.zeros(s.algebra), a))

    def test_hs1d_energy_equals_lagrangian(self, rng):
        s = build_system("hs1d", {"N": 64})
        xi = s.random_xi(rng)
        xi = AlgElem(s.algebra, xi.coords - xi.coords.mean())
        mu = s.lagrangian.d_xi(xi)
        q = conserved_quantities(s, EPState(0.0, mu, None), xi)
        assert q["energy"] == pytest.approx(s.lagrangian.value(xi), rel=1e-13)

    def test_nematic_energy(self):
        s = build_system("nematic", {"j": 1.3, "lambda_nem": 0.8})
        traj = integrate(s, *s.default_init(), T=10.0, dt=1e-3)
        k = s.params["k"]
        energy = 0.5 * 1.3 * np.sum(traj.xi ** 2, axis=1) + 0.4 * (traj.a @ k) ** 2
        assert np.max(np.abs(energy - energy[0])) <= 1e-8
        rep = conservation_report(s, traj)
        assert rep["energy"]["initial"] == pytest.approx(energy[0], rel=1e-14)
        assert rep["sphere_norm"]["drift"] <= 1e-10
        assert traj.diagnostics["sphere_defect_max"] <= 1e-12

    @pytest.mark.parametrize("name", ["hs1d", "spin_lattice"])
    def test_kernel_component_of_coadjoint_term(self, name):
        s = build_system(name)
        traj = integrate(s, *s.default_init(), T=0.2, dt=1e-3)
        kernel = s.lagrangian.kernel()
        for i in range(0, len(traj), 20):
            mu = DualElem(s.algebra, traj.mu[i])
            xi = AlgElem(s.algebra, traj.xi[i])
            adv = ad_star(xi, mu)
            for k in kernel:
                assert abs(pair(adv, AlgElem(s.algebra, k))) <= 1e-12
            for k in kernel:
                assert abs(pair(mu, AlgElem(s.algebra, k))) <= 1e-12

    def test_spin_compatibility(self):
        s = build_system("spin_lattice")
        traj = integrate(s, *s.default_init(), T=0.2, dt=1e-3)
        assert conservation_report(s, traj)["spin_compatibility"]["max_abs"] <= 1e-12
