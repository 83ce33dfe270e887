"""Wired example systems and independent reference right-hand sides.

Each bundle ties together an algebra, a parameter action, an equation family
and a Lagrangian, plus the analytic path catalogs used by the invariance
checks:

``h_paths``  paths in the symmetry group of the Lagrangian; derivatives may be
             re-evaluated on transformed curves.
``g_paths``  paths in the full structure group; valid only for the operator
             level ("transport") checks.

Parameter keys (the CLI contract):

==================  ======================================================
heavy_top           ``I`` (3 positive moments), ``lambda`` (R^3), ``sigma``
nematic(_projected) ``j``, ``lambda_nem``, ``k`` (unit R^3), ``sigma``
hs1d                ``N``
density_hs1d        ``N``, ``rho_min``
spin_lattice        ``N``, ``lagrangian`` (``l1`` | ``l2`` | ``l3``)
==================  ======================================================
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .actions import ActionDescriptor, ActionKind, AdvectedState, CocycleKind
from .algebra import AlgebraDescriptor, AlgElem, DualElem, grid_derivative, gauge_so3, so3, vect_s1
from .dynamics import EPState, EquationFamily
from .invariance import CurvePair, HPath, PathFamily, Schedule
from .lagrangian import (
    DensityHSLagrangian,
    HeavyTopLagrangian,
    HunterSaxtonLagrangian,
    NematicLagrangian,
    ReducedLagrangian,
    SpinLagrangian,
)

__all__ = [
    "SYSTEM_NAMES",
    "SystemBundle",
    "build_system",
    "reference_momentum",
    "reference_rhs",
    "reference_residual",
    "negative_controls",
    "NegativeControl",
]

SYSTEM_NAMES = ("heavy_top", "nematic", "nematic_projected", "hs1d", "density_hs1d", "spin_lattice")

_DEFAULTS = {
    "heavy_top": {"I": [1.0, 2.0, 3.0], "lambda": [0.0, 0.0, 1.0], "sigma": 1},
    "nematic": {"j": 1.0, "lambda_nem": 1.0, "k": [0.0, 0.0, 1.0], "sigma": 1},
    "nematic_projected": {"j": 1.0, "lambda_nem": 1.0, "k": [0.0, 0.0, 1.0], "sigma": 1},
    "hs1d": {"N": 128},
    "density_hs1d": {"N": 128, "rho_min": 1e-6},
    "spin_lattice": {"N": 128, "lagrangian": "l3"},
}

DEFAULT_TIME = {"ode": {"T": 10.0, "dt": 1e-3}, "pde": {"T": 1.0, "dt": 1e-3}}


@dataclass(frozen=True)
class SystemBundle:
    name: str
    algebra: AlgebraDescriptor
    action: ActionDescriptor | None
    family: EquationFamily
    lagrangian: ReducedLagrangian
    params: dict
    h_paths: tuple = ()
    g_paths: tuple = ()
    conserved: tuple = ("energy",)
    # directions of the isotropy algebra along which l is shift invariant
    eta_basis: tuple = ()
    has_reference: bool = False
    # additive allowance of the solution-transport check; on the circle the
    # shift generator differs from the stencil at O(dx^4)
    transport_floor: float = 1e-6
    _init: Callable | None = field(default=None, repr=False)

    @property
    def is_pde(self) -> bool:
        return self.algebra.grid_size is not None

    @property
    def default_time(self) -> dict:
        return dict(DEFAULT_TIME["pde" if self.is_pde else "ode"])

    # -- initial data -------------------------------------------------------

    def default_init(self):
        return self._init(self)

    def zero_init(self):
        """Zero velocity with the trivial parameter (an equilibrium of every system)."""
        xi = AlgElem.zeros(self.algebra)
        if self.action is None:
            return xi, None
        if self.action.kind is ActionKind.SPHERE_SO3:
            return xi, AdvectedState(self.action, self.params["k"])
        if self.action.kind is ActionKind.DENSITY_S1:
            return xi, AdvectedState(self.action, np.ones(self.action.size), positive=True)
        return xi, AdvectedState(self.action, np.zeros(self.action.size))

    def make_init(self, xi, a=None):
        """Initial data from raw arrays, with the bundle's validation."""
        xi = AlgElem(self.algebra, np.asarray(xi, dtype=float))
        if self.action is None:
            if a is not None:
                raise ValueError(f"{self.name} takes no advected parameter")
            return xi, None
        if a is None:
            raise ValueError(f"{self.name} needs an advected parameter")
        a = np.asarray(a, dtype=float)
        if self.action.kind is ActionKind.DENSITY_S1 and np.min(a) < self.params["rho_min"]:
            raise ValueError("initial density is below rho_min")
        return xi, AdvectedState(self.action, a)

    # -- random data --------------------------------------------------------

    def random_xi(self, rng: np.random.Generator) -> AlgElem:
        if not self.is_pde:
            return AlgElem(self.algebra, rng.normal(size=3))
        return AlgElem(self.algebra, _smooth_field(rng, self.algebra))

    def random_a(self, rng: np.random.Generator) -> AdvectedState | None:
        d = self.action
        if d is None:
            return None
        if d.kind is ActionKind.LINEAR_R3:
            return AdvectedState(d, rng.normal(size=3))
        if d.kind is ActionKind.SPHERE_SO3:
            v = rng.normal(size=3)
            return AdvectedState(d, v / np.linalg.norm(v))
        if d.kind is ActionKind.DENSITY_S1:
            return AdvectedState(d, _positive_field(rng, self.algebra), positive=True)
        return AdvectedState(d, _smooth_field(rng, self.algebra))

    def random_eta(self, rng: np.random.Generator) -> AlgElem | None:
        if not self.eta_basis:
            return None
        coeffs = rng.normal(size=len(self.eta_basis))
        return AlgElem(self.algebra, sum(c * b for c, b in zip(coeffs, self.eta_basis)))

    def random_samples(self, rng: np.random.Generator, n: int, t_range=(0.0, 2.0)):
        """``(xi, a, t, eta)`` tuples for the pointwise invariance checks."""
        out = []
        for _ in range(n):
            out.append((self.random_xi(rng), self.random_a(rng),
                        float(rng.uniform(*t_range)), self.random_eta(rng)))
        return out

    def random_curve(self, rng: np.random.Generator) -> CurvePair:
        """Analytic curve ``X0 + X1 cos(w1 t + p1) + X2 sin(w2 t + p2)`` (not a solution)."""
        xs = [self.random_xi(rng).coords for _ in range(3)]
        w = rng.uniform(0.5, 2.0, size=4)
        p = rng.uniform(0.0, 2 * np.pi, size=4)
        alg = self.algebra

        def xi(t):
            return AlgElem(alg, xs[0] + xs[1] * np.cos(w[0] * t + p[0]) + xs[2] * np.sin(w[1] * t + p[1]))

        d = self.action
        if d is None:
            return CurvePair(xi)
        if d.kind is ActionKind.DENSITY_S1:
            base = _positive_field(rng, alg)
            bump = _smooth_field(rng, alg)
            bump = 0.3 * bump / max(np.max(np.abs(bump)), 1e-12)

            def a(t):
                return AdvectedState(d, base * (1.0 + bump * np.sin(w[2] * t + p[2])))

            return CurvePair(xi, a)
        as_ = [self.random_a(rng).value for _ in range(3)]
        unit = d.kind is ActionKind.SPHERE_SO3
        scale = 0.5 if unit else 1.0

        def a(t):
            v = as_[0] + scale * (as_[1] * np.cos(w[2] * t + p[2]) + as_[2] * np.sin(w[3] * t + p[3]))
            if unit:
                v = v / np.linalg.norm(v)
            return AdvectedState(d, v)

        return CurvePair(xi, a)


# ---------------------------------------------------------------------------
# random smooth fields


def _smooth_field(rng, alg: AlgebraDescriptor, modes: int = 3) -> np.ndarray:
    x = alg.grid
    comps = alg.field_shape[1] if len(alg.field_shape) > 1 else 1
    out = np.zeros((alg.grid_size, comps))
    for c in range(comps):
        out[:, c] = rng.normal() * 0.5
        for k in range(1, modes + 1):
            a, b = rng.normal(size=2) / k
            out[:, c] += a * np.cos(k * x) + b * np.sin(k * x)
    return out.reshape(-1)


def _positive_field(rng, alg: AlgebraDescriptor) -> np.ndarray:
    f = _smooth_field(rng, alg, modes=2)
    f = f - f.mean()
    return 1.0 + 0.5 * f / max(np.max(np.abs(f)), 1e-12)


# ---------------------------------------------------------------------------
# parameter validation


def _vec3(params, key) -> np.ndarray:
    v = np.asarray(params[key], dtype=float)
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise ValueError(f"parameter {key!r} must be a finite 3-vector")
    return v


def _grid_size(params) -> int:
    n = params["N"]
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 8 or n % 2:
        raise ValueError("N must be an even integer >= 8")
    return int(n)


def _sigma(params) -> int:
    s = params["sigma"]
    if s not in (1, -1):
        raise ValueError("sigma must be +1 or -1")
    return int(s)


def _merge(name: str, params: dict | None) -> dict:
    if name not in _DEFAULTS:
        raise ValueError(f"unknown system {name!r}; expected one of {', '.join(SYSTEM_NAMES)}")
    merged = dict(_DEFAULTS[name])
    for key, val in (params or {}).items():
        if key not in merged:
            raise ValueError(f"unknown parameter {key!r} for {name}")
        merged[key] = val
    return merged


def _so3_catalog(axis, angles=None) -> tuple:
    if angles is not None:
        return tuple(HPath(PathFamily.SO3_PATH, Schedule.CONSTANT, theta0=a, axis=tuple(axis),
                           label=f"SO3_PATH/constant/{a:g}") for a in angles)
    return (
        HPath(PathFamily.SO3_PATH, Schedule.CONSTANT, theta0=0.7, axis=tuple(axis)),
        HPath(PathFamily.SO3_PATH, Schedule.LINEAR, theta0=0.2, omega=0.8, axis=tuple(axis)),
        HPath(PathFamily.SO3_PATH, Schedule.SINUSOIDAL, theta0=0.1, eps=0.5, freq=1.3, axis=tuple(axis)),
    )


# generic axes for full-group paths
_G_PATHS = (
    HPath(PathFamily.SO3_PATH, Schedule.CONSTANT, theta0=0.7, axis=(1.0, 2.0, 2.0), label="G/constant"),
    HPath(PathFamily.SO3_PATH, Schedule.LINEAR, theta0=0.2, omega=0.8, axis=(0.0, 1.0, 1.0), label="G/linear"),
    HPath(PathFamily.SO3_PATH, Schedule.SINUSOIDAL, theta0=0.1, eps=0.5, freq=1.3,
          axis=(1.0, 0.0, 1.0), label="G/sinusoidal"),
)

_S1_PATHS = (
    HPath(PathFamily.ROTATION_S1, Schedule.CONSTANT, theta0=0.37),
    HPath(PathFamily.ROTATION_S1, Schedule.LINEAR, omega=0.8),
    HPath(PathFamily.ROTATION_S1, Schedule.SINUSOIDAL, eps=0.3, freq=1.0),
)

_GAUGE_PATHS = (
    HPath(PathFamily.CONST_GAUGE, Schedule.CONSTANT, theta0=0.7, axis=(1.0, 2.0, 2.0)),
    HPath(PathFamily.CONST_GAUGE, Schedule.LINEAR, theta0=0.2, omega=0.8, axis=(0.0, 1.0, 1.0)),
    HPath(PathFamily.CONST_GAUGE, Schedule.SINUSOIDAL, theta0=0.1, eps=0.5, freq=1.3, axis=(1.0, 0.0, 1.0)),
)


def _is_lagrange_top(inertia, lam) -> bool:
    """Symmetric top: lambda is a principal axis and the other two moments agree."""
    nz = np.flatnonzero(np.abs(lam) > 1e-14)
    if len(nz) != 1:
        return False
    others = [inertia[i] for i in range(3) if i != nz[0]]
    return abs(others[0] - others[1]) <= 1e-14 * max(others)


# ---------------------------------------------------------------------------
# builders


def _heavy_top_init(s):
    return s.make_init([1.0, 0.0, 0.0], [0.0, 0.0, 1.0])


def _nematic_init(s):
    m = np.array([1.0, 0.5, 0.8])
    xi = np.array([0.3, -0.2, 0.5])
    if s.name == "nematic_projected":
        k = s.params["k"]
        xi = xi - (xi @ k) * k
    return s.make_init(xi, m / np.linalg.norm(m))


def _hs_init(s):
    x = s.algebra.grid
    return s.make_init(0.2 * np.sin(x))


def _density_init(s):
    x = s.algebra.grid
    return s.make_init(0.2 * np.sin(x), 1.0 + 0.2 * np.cos(x))


def _spin_init(s):
    x = s.algebra.grid
    xi = np.stack([0.3 * np.sin(x), 0.2 * np.cos(2 * x), 0.1 * np.sin(x + 0.4)], axis=1)
    gamma = np.stack([0.2 * np.cos(x), 0.1 * np.sin(2 * x), 0.3 + 0.1 * np.cos(x)], axis=1)
    return s.make_init(xi.reshape(-1), gamma.reshape(-1))


def build_system(name: str, params: dict | None = None) -> SystemBundle:
    """Wire a named system; unknown or out-of-range parameters raise ``ValueError``."""
    p = _merge(name, params)

    if name == "heavy_top":
        inertia, lam = _vec3(p, "I"), _vec3(p, "lambda")
        if np.any(inertia <= 0):
            raise ValueError("principal moments I must be positive")
        alg = so3()
        act = ActionDescriptor(ActionKind.LINEAR_R3, alg, sigma=_sigma(p))
        lag = HeavyTopLagrangian(alg, act, inertia, lam)
        h_paths = (_so3_catalog(lam / np.linalg.norm(lam), angles=(0.7, -1.9, 2.6))
                   if _is_lagrange_top(inertia, lam)
                   else (HPath(PathFamily.SO3_PATH, label="identity"),))
        p.update(I=inertia.tolist(), **{"lambda": lam.tolist()})
        return SystemBundle(name, alg, act, EquationFamily.ADVECTED, lag, p, h_paths, _G_PATHS,
                            ("energy", "gamma_norm_sq", "gamma_dot_mu"), _init=_heavy_top_init)

    if name in ("nematic", "nematic_projected"):
        k = _vec3(p, "k")
        if abs(np.linalg.norm(k) - 1.0) > 1e-12:
            raise ValueError("k must be a unit vector")
        j, lam = float(p["j"]), float(p["lambda_nem"])
        if not j > 0:
            raise ValueError("j must be positive")
        if not np.isfinite(lam):
            raise ValueError("lambda_nem must be finite")
        projected = name == "nematic_projected"
        alg = so3()
        act = ActionDescriptor(ActionKind.SPHERE_SO3, alg, sigma=_sigma(p))
        lag = NematicLagrangian(alg, act, j, lam, k, projected=projected)
        if projected:
            h_paths, eta = _so3_catalog(k), (k.copy(),)
        else:
            # constant rotations about k preserve l; time-dependent ones do not
            h_paths, eta = _so3_catalog(k, angles=(0.7, -1.9, 2.6)), ()
        p.update(j=j, lambda_nem=lam, k=k)
        return SystemBundle(name, alg, act, EquationFamily.BREAKING, lag, p, h_paths, _G_PATHS,
                            ("energy", "sphere_norm"), eta, _init=_nematic_init)

    n = _grid_size(p)
    if name == "hs1d":
        alg = vect_s1(n)
        lag = HunterSaxtonLagrangian(alg)
        return SystemBundle(name, alg, None, EquationFamily.PLAIN, lag, p, _S1_PATHS, (),
                            ("energy", "mu_mean"), (np.ones(n),), True, 1e-5, _init=_hs_init)

    if name == "density_hs1d":
        rho_min = float(p["rho_min"])
        if not rho_min > 0:
            raise ValueError("rho_min must be positive")
        alg = vect_s1(n)
        act = ActionDescriptor(ActionKind.DENSITY_S1, alg)
        lag = DensityHSLagrangian(alg, act)
        p["rho_min"] = rho_min
        return SystemBundle(name, alg, act, EquationFamily.ADVECTED, lag, p, _S1_PATHS, (),
                            ("energy", "mu_mean"), (np.ones(n),), True, 1e-5, _init=_density_init)

    # spin_lattice
    variant = {"l1": 1, "l2": 2, "l3": 3}.get(p["lagrangian"])
    if variant is None:
        raise ValueError("lagrangian must be one of l1, l2, l3")
    alg = gauge_so3(n)
    act = ActionDescriptor(ActionKind.CONNECTION_GAUGE, alg, cocycle=CocycleKind.GAUGE_LOG_DERIVATIVE)
    lag = SpinLagrangian(alg, act, variant)
    eta = tuple(np.tile(e, (n, 1)).reshape(-1) for e in np.eye(3))
    conserved = ("energy", "spin_compatibility")
    return SystemBundle(name, alg, act, EquationFamily.AFFINE, lag, p, _GAUGE_PATHS, (),
                        conserved, eta, variant == 3, _init=_spin_init)


# ---------------------------------------------------------------------------
# independent reference equations
#
# Coded directly from the explicit component equations, on raw arrays, with
# the same 4th-order stencil ``D``:
#
#   hs1d          mu = -D^2 u,  d/dt D^2 u + D(u D^2 u) + (D u)(D^2 u) = 0
#   density_hs1d  mu = -D(rho D u),
#                 d/dt D(rho D u) + D(u D(rho D u)) + D(rho (D u)^2) = 0,
#                 rho' + D(rho u) = 0
#   spin, l3      mu = -2 D^2 xi,  mu' + mu x xi = -div^g(-2 gamma),
#                 div^g(alpha) = gamma x alpha - D alpha,
#                 gamma' + D xi + gamma x xi = 0


def _need_reference(system):
    if not system.has_reference:
        raise NotImplementedError(f"{system.name} has no explicit reference equation")


def reference_momentum(system, xi: AlgElem, a: AdvectedState | None) -> DualElem:
    _need_reference(system)
    dx = system.algebra.spacing
    D = lambda f: grid_derivative(f, dx)
    if system.name == "hs1d":
        return DualElem(system.algebra, -D(D(xi.coords)))
    if system.name == "density_hs1d":
        return DualElem(system.algebra, -D(a.value * D(xi.coords)))
    return DualElem(system.algebra, -2.0 * D(D(xi.field)))


def _reference_tangent(system, xi: AlgElem, a: AdvectedState | None):
    dx = system.algebra.spacing
    D = lambda f: grid_derivative(f, dx)
    if system.name == "hs1d":
        u = xi.coords
        uxx = D(D(u))
        return D(u * uxx) + D(u) * uxx, None
    if system.name == "density_hs1d":
        u, rho = xi.coords, a.value
        ux = D(u)
        flux = D(rho * ux)
        return D(u * flux) + D(rho * ux * ux), -D(rho * u)
    x, g = xi.field, a.field
    mu = -2.0 * D(D(x))
    alpha = -2.0 * g
    div_g = np.cross(g, alpha) - D(alpha)
    dmu = -np.cross(mu, x) - div_g
    dgamma = -D(x) - np.cross(g, x)
    return dmu.reshape(-1), dgamma.reshape(-1)


def reference_rhs(system, state: EPState, xi: AlgElem | None = None):
    """Time derivatives ``(mu', a')`` of the integrated variables from the explicit equations.

    ``xi`` is reconstructed from ``state.mu`` when not given. ``a'`` is None
    for parameter-free systems.
    """
    _need_reference(system)
    if xi is None:
        xi = system.lagrangian.inertia_solve(state.mu, state.a)
    return _reference_tangent(system, xi, state.a)


def reference_residual(system, curve: CurvePair, t: float, h: float):
    """Residuals ``(mu_ref' - rhs, a' - rhs)`` of a curve under the reference equations."""
    from .algebra import time_derivative

    _need_reference(system)
    xi, a = curve(t)
    dmu = time_derivative(lambda s: reference_momentum(system, *curve(s)).coords, t, h)
    rhs_mu, rhs_a = _reference_tangent(system, xi, a)
    ep = dmu - rhs_mu
    if rhs_a is None:
        return ep, np.zeros(0)
    da = time_derivative(lambda s: curve(s)[1].value, t, h)
    return ep, da - rhs_a


# ---------------------------------------------------------------------------
# negative controls


@dataclass(frozen=True)
class NegativeControl:
    """A deliberately broken configuration whose check must fail."""

    name: str
    system: str
    params: dict
    check: str
    path: HPath
    mode: str = "evaluate"


def negative_controls() -> tuple[NegativeControl, ...]:
    return (
        NegativeControl(
            "nematic_wrong_axis", "nematic", {}, "lagrangian_invariance",
            HPath(PathFamily.SO3_PATH, Schedule.CONSTANT, theta0=0.9, axis=(1.0, 0.0, 0.0),
                  label="SO3_PATH/constant/e1")),
        NegativeControl(
            "spin_local_gauge", "spin_lattice", {"lagrangian": "l3"}, "lagrangian_invariance",
            HPath(PathFamily.LOCAL_GAUGE, Schedule.CONSTANT, theta0=0.8, axis=(0.0, 0.6, 0.8), mode=1,
                  label="LOCAL_GAUGE/constant")),
        NegativeControl(
            "heavy_top_wrong_sign", "heavy_top", {"sigma": -1}, "residual_equivariance",
            HPath(PathFamily.SO3_PATH, Schedule.LINEAR, theta0=0.2, omega=0.8, axis=(0.0, 1.0, 1.0),
                  label="SO3_PATH/linear"), mode="transport"),
    )
