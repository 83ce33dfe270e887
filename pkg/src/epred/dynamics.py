"""Euler-Poincare residuals, RK4 integration in (mu, a) variables, conserved quantities.

The integrated variables are the momentum ``mu = dl/dxi`` and the advected
parameter ``a``; the velocity is reconstructed at every stage by the
Lagrangian's inertia solve. The coupled system is

    mu' = -ad*_xi mu + F(xi, a),      a' = xi a (+ dc(xi))

with the family forcing ``F`` equal to 0 (PLAIN), ``dl/da <> a`` (ADVECTED),
``J(dl/dm)`` (BREAKING) or ``dl/da <> a + dc^T(dl/da)`` (AFFINE).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .actions import (
    ActionDescriptor,
    ActionKind,
    AdvectedState,
    diamond,
    infinitesimal_generator,
    momentum_map,
)
from .algebra import AlgElem, DualElem, ad_star, cross, pair, time_derivative
from .lagrangian import CompatibilityError, ReducedLagrangian

__all__ = [
    "EquationFamily",
    "FamilyMismatch",
    "IntegrationAbort",
    "EPState",
    "Trajectory",
    "check_family",
    "forcing",
    "advect_rhs",
    "ep_operator",
    "ep_residual",
    "advection_residual",
    "integrate",
    "conserved_quantities",
    "conservation_report",
]

KERNEL_DRIFT_TOL = 1e-6

Curve = Callable[[float], "tuple[AlgElem, AdvectedState | None]"]


class EquationFamily(str, enum.Enum):
    PLAIN = "PLAIN"
    ADVECTED = "ADVECTED"
    BREAKING = "BREAKING"
    AFFINE = "AFFINE"


class FamilyMismatch(ValueError):
    pass


class IntegrationAbort(RuntimeError):
    """Integration stopped: non-finite state or momentum left the constraint manifold."""


def check_family(family: EquationFamily, action: ActionDescriptor | None) -> None:
    if family is EquationFamily.PLAIN:
        ok = action is None
    elif family is EquationFamily.ADVECTED:
        ok = action is not None and not action.is_manifold and not action.affine
    elif family is EquationFamily.BREAKING:
        ok = action is not None and action.is_manifold
    else:
        ok = action is not None and action.affine
    if not ok:
        raise FamilyMismatch(f"{family.value} is incompatible with action {action}")


@dataclass(frozen=True)
class EPState:
    t: float
    mu: DualElem
    a: AdvectedState | None = None


@dataclass
class Trajectory:
    """Uniformly stepped solution; arrays are indexed by step."""

    times: np.ndarray
    mu: np.ndarray
    xi: np.ndarray
    a: np.ndarray | None
    algebra: object
    action: ActionDescriptor | None
    diagnostics: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.times)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    def advected(self, i: int) -> AdvectedState | None:
        return None if self.a is None else AdvectedState(self.action, self.a[i])

    def state(self, i: int) -> EPState:
        return EPState(float(self.times[i]), DualElem(self.algebra, self.mu[i]), self.advected(i))

    @property
    def states(self) -> list[EPState]:
        return [self.state(i) for i in range(len(self))]

    @property
    def xi_samples(self) -> list[AlgElem]:
        return [AlgElem(self.algebra, x) for x in self.xi]


def forcing(family: EquationFamily, lag: ReducedLagrangian, xi: AlgElem,
            a: AdvectedState | None) -> DualElem:
    if family is EquationFamily.PLAIN:
        return DualElem.zeros(xi.desc)
    return forcing_from(family, lag.d_a(xi, a), a)


def forcing_from(family: EquationFamily, v, a: AdvectedState) -> DualElem:
    """Family forcing for a given dual-parameter value ``v = dl/da``."""
    if family is EquationFamily.ADVECTED:
        return diamond(v, a)
    if family in (EquationFamily.BREAKING, EquationFamily.AFFINE):
        return momentum_map(a, v)
    raise FamilyMismatch(f"{family.value} has no parameter forcing")


def advect_rhs(family: EquationFamily, xi: AlgElem, a: AdvectedState) -> np.ndarray:
    """``xi a`` plus ``dc(xi)`` for AFFINE."""
    check_family(family, a.desc)
    return infinitesimal_generator(xi, a)


def ep_operator(family: EquationFamily, mu_of: Callable[[float], DualElem],
                v_of: Callable[[float], np.ndarray] | None,
                xi: AlgElem, a: AdvectedState | None, t: float, h: float) -> DualElem:
    """``d/dt mu + ad*_xi mu - F(v, a)`` with ``mu`` and ``v`` supplied as curves."""
    mu = mu_of(t)
    dmu = time_derivative(lambda s: mu_of(s).coords, t, h)
    out = DualElem(mu.desc, dmu) + ad_star(xi, mu)
    if family is not EquationFamily.PLAIN:
        out = out - forcing_from(family, v_of(t), a)
    return out


def ep_residual(family: EquationFamily, lag: ReducedLagrangian, curve: Curve,
                t: float, h: float) -> DualElem:
    """EP residual (LHS - RHS) of a curve ``s -> (xi(s), a(s))`` at ``t``."""
    xi, a = curve(t)
    if family is EquationFamily.PLAIN:
        if a is not None:
            raise FamilyMismatch("PLAIN family takes no parameter")
    else:
        check_family(family, a.desc)
    return ep_operator(family, lambda s: lag.d_xi(*curve(s)),
                       lambda s: lag.d_a(*curve(s)), xi, a, t, h)


def advection_residual(family: EquationFamily, curve: Curve, t: float, h: float) -> np.ndarray:
    """``a' - xi a (- dc(xi))`` along the curve; empty for PLAIN."""
    xi, a = curve(t)
    if a is None:
        return np.zeros(0)
    da = time_derivative(lambda s: curve(s)[1].value, t, h)
    return da - advect_rhs(family, xi, a)


# ---------------------------------------------------------------------------
# integration


class _Vector:
    """Packs (mu, a) into one flat array for the Runge-Kutta stages."""

    def __init__(self, system):
        self.system = system
        self.lag = system.lagrangian
        self.algebra = system.algebra
        self.action = system.action
        self.family = system.family
        self.n_mu = self.algebra.dim
        self.rho_min = system.params.get("rho_min")

    def split(self, y):
        mu = DualElem(self.algebra, y[:self.n_mu])
        a = None
        if self.action is not None:
            vals = y[self.n_mu:]
            if self.action.is_manifold:
                # stage values drift off the sphere by O(dt^5); evaluate on it
                vals = vals / np.linalg.norm(vals)
            a = AdvectedState(self.action, vals)
        return mu, a

    def velocity(self, mu, a, tol=KERNEL_DRIFT_TOL):
        try:
            return self.lag.inertia_solve(mu, a, tol=tol)
        except CompatibilityError as exc:
            raise IntegrationAbort(f"kernel drift: {exc}") from exc

    def rhs(self, y):
        if not np.all(np.isfinite(y)):
            raise IntegrationAbort("non-finite state")
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                return self._rhs(y)
        except ValueError as exc:
            # element constructors reject overflowed intermediates
            raise IntegrationAbort(f"non-finite stage value: {exc}") from exc

    def _rhs(self, y):
        mu, a = self.split(y)
        if self.rho_min is not None and a is not None and np.min(a.value) < self.rho_min:
            raise IntegrationAbort(f"density fell below rho_min={self.rho_min}")
        xi = self.velocity(mu, a)
        dmu = -ad_star(xi, mu).coords
        if self.family is EquationFamily.PLAIN:
            return dmu
        dmu = dmu + forcing(self.family, self.lag, xi, a).coords
        return np.concatenate([dmu, advect_rhs(self.family, xi, a)])


def integrate(system, xi0: AlgElem, a0: AdvectedState | None, T: float, dt: float) -> Trajectory:
    """Classical RK4 with fixed step ``dt`` up to time ``T``; every step is recorded."""
    lag = system.lagrangian
    if not lag.integrable:
        raise ValueError(f"{lag.name} is not integrable")
    if not (dt > 0 and T > 0):
        raise ValueError("T and dt must be positive")
    steps = int(round(T / dt))
    if steps < 1 or not math.isclose(steps * dt, T, rel_tol=1e-9, abs_tol=1e-12):
        raise ValueError(f"T={T} is not an integer multiple of dt={dt}")
    vec = _Vector(system)
    mu0 = lag.d_xi(xi0, a0)
    y = mu0.coords.copy()
    if a0 is not None:
        y = np.concatenate([y, a0.value])
    n_mu = vec.n_mu

    ys = np.empty((steps + 1, y.size))
    ys[0] = y
    sphere_defect = 0.0
    for i in range(steps):
        k1 = vec.rhs(y)
        k2 = vec.rhs(y + 0.5 * dt * k1)
        k3 = vec.rhs(y + 0.5 * dt * k2)
        k4 = vec.rhs(y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise IntegrationAbort(f"non-finite state at step {i + 1}")
        if system.action is not None and system.action.is_manifold:
            nrm = np.linalg.norm(y[n_mu:])
            sphere_defect = max(sphere_defect, abs(nrm - 1.0))
            y[n_mu:] /= nrm
        ys[i + 1] = y

    times = np.arange(steps + 1) * dt
    mus = ys[:, :n_mu]
    avals = ys[:, n_mu:] if system.action is not None else None
    xis = np.empty_like(mus)
    for i in range(steps + 1):
        mu, a = vec.split(ys[i])
        xis[i] = vec.velocity(mu, a).coords
    diagnostics = {"steps": steps}
    if system.action is not None and system.action.is_manifold:
        diagnostics["sphere_defect_max"] = sphere_defect
    return Trajectory(times, mus, xis, avals, system.algebra, system.action, diagnostics)


# ---------------------------------------------------------------------------
# conserved quantities


def _energy(system, mu, xi, a):
    return pair(mu, xi) - system.lagrangian.value(xi, a)


def _spin_compat(system, mu, xi, a):
    return float(np.max(np.abs(np.sum(cross(mu.field, xi.field), axis=0))))


_QUANTITIES = {
    "energy": _energy,
    "gamma_norm_sq": lambda s, mu, xi, a: float(a.value @ a.value),
    "gamma_dot_mu": lambda s, mu, xi, a: float(a.value @ mu.coords),
    "sphere_norm": lambda s, mu, xi, a: float(np.linalg.norm(a.value)),
    "mu_mean": lambda s, mu, xi, a: float(np.mean(mu.coords)),
    "spin_compatibility": _spin_compat,
}


def conserved_quantities(system, state: EPState, xi: AlgElem | None = None) -> dict[str, float]:
    """Evaluate the system's declared conserved quantities at a state."""
    if xi is None:
        xi = system.lagrangian.inertia_solve(state.mu, state.a, tol=KERNEL_DRIFT_TOL)
    return {name: float(_QUANTITIES[name](system, state.mu, xi, state.a)) for name in system.conserved}


# quantities whose reference value is zero are reported as absolute drift
_ABSOLUTE = {"mu_mean", "spin_compatibility"}


def conservation_report(system, traj: Trajectory) -> dict[str, dict]:
    """Initial, final and worst drift of every conserved quantity along a trajectory."""
    series = {name: np.empty(len(traj)) for name in system.conserved}
    for i in range(len(traj)):
        st = traj.state(i)
        vals = conserved_quantities(system, st, AlgElem(traj.algebra, traj.xi[i]))
        for k, v in vals.items():
            series[k][i] = v
    out = {}
    for name, s in series.items():
        drift = float(np.max(np.abs(s - s[0])))
        if name in _ABSOLUTE:
            out[name] = {"initial": float(s[0]), "final": float(s[-1]),
                         "max_abs": float(np.max(np.abs(s))), "drift": drift, "relative": False}
        else:
            scale = abs(float(s[0]))
            rel = drift / scale if scale > 0 else drift
            out[name] = {"initial": float(s[0]), "final": float(s[-1]),
                         "drift": rel, "abs_drift": drift, "relative": scale > 0}
    return out
