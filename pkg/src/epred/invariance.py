"""Path-group actions on (xi, a)-curves and the invariance / equivariance checks.

A curve ``h(t)`` in the isotropy group acts on curves in the algebra and
parameter space by

    h . (xi, a) = (Ad_h xi + dr h,  theta_h(a)),        dr h = h' h^{-1}.

The checks below evaluate, on sampled inputs, the statements that make the
reduced equations well defined on the homogeneous space:

* ``check_lagrangian_invariance``   l(h . (xi, a)) = l(xi, a) (with an extra shift in the isotropy algebra)
* ``check_derivative_equivariance`` dl/dxi and dl/da transform by Ad*_{h^-1} and rho_{h^-1}
* ``check_residual_equivariance``   residual(h . c) = Ad*_{h^-1} residual(c) for arbitrary curves c
* ``check_solution_transport``      transformed numerical solutions still solve the equations

The residual check has two modes. ``evaluate`` re-evaluates the Lagrangian's
derivatives on the transformed curve and therefore needs an invariant
Lagrangian. ``transport`` carries the derivative fields along with
``Ad*_{h^-1}`` and ``rho_{h^-1}``; it tests the equation operator alone and is
valid for any path in the full group.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .actions import AdvectedState, act_group, act_linear, transport_dual
from .algebra import (
    AlgebraDescriptor,
    AlgebraKind,
    AlgElem,
    DualElem,
    GroupElem,
    compose,
    group_ad,
    group_ad_star,
    identity,
    inverse,
    rotation,
    vee,
)
from .dynamics import EquationFamily, advection_residual, ep_operator, integrate

__all__ = [
    "PathFamily",
    "Schedule",
    "HPath",
    "ComposedPath",
    "CurvePair",
    "CheckReport",
    "act_on_curve",
    "spline_curve",
    "numeric_right_derivative",
    "check_lagrangian_invariance",
    "check_derivative_equivariance",
    "check_residual_equivariance",
    "check_solution_transport",
]

SO3_TOL = 1e-9
LATTICE_TOL = 1e-7
RESIDUAL_TOL = 1e-6


class PathFamily(str, enum.Enum):
    ROTATION_S1 = "ROTATION_S1"
    SO3_PATH = "SO3_PATH"
    CONST_GAUGE = "CONST_GAUGE"
    # space-dependent gauge transformations: outside the isotropy group of the
    # spin Lagrangians, used for negative controls
    LOCAL_GAUGE = "LOCAL_GAUGE"


class Schedule(str, enum.Enum):
    CONSTANT = "constant"
    LINEAR = "linear"
    SINUSOIDAL = "sinusoidal"


_ALGEBRA_FOR = {
    PathFamily.ROTATION_S1: AlgebraKind.VECT_S1,
    PathFamily.SO3_PATH: AlgebraKind.SO3,
    PathFamily.CONST_GAUGE: AlgebraKind.GAUGE_SO3,
    PathFamily.LOCAL_GAUGE: AlgebraKind.GAUGE_SO3,
}


@dataclass(frozen=True)
class HPath:
    """Analytic path ``h(t)``: a rotation by angle ``theta(t)`` about a fixed axis.

    ``theta(t)`` is ``theta0`` (constant), ``theta0 + omega t`` (linear) or
    ``theta0 + eps sin(freq t)`` (sinusoidal). On the circle the rotation is the
    rigid shift ``x -> x + theta``; ``LOCAL_GAUGE`` scales the angle by
    ``sin(mode x)`` site by site.
    """

    family: PathFamily
    schedule: Schedule = Schedule.CONSTANT
    theta0: float = 0.0
    omega: float = 0.0
    eps: float = 0.0
    freq: float = 1.0
    axis: tuple[float, float, float] = (0.0, 0.0, 1.0)
    mode: int = 1
    label: str = ""

    def __post_init__(self):
        ax = np.asarray(self.axis, dtype=float)
        nrm = np.linalg.norm(ax)
        if nrm == 0:
            raise ValueError("rotation axis must be nonzero")
        object.__setattr__(self, "axis", tuple(float(c) for c in ax / nrm))
        object.__setattr__(self, "family", PathFamily(self.family))
        object.__setattr__(self, "schedule", Schedule(self.schedule))

    @property
    def name(self) -> str:
        return self.label or f"{self.family.value}/{self.schedule.value}"

    def angle(self, t: float) -> float:
        if self.schedule is Schedule.CONSTANT:
            return self.theta0
        if self.schedule is Schedule.LINEAR:
            return self.theta0 + self.omega * t
        return self.theta0 + self.eps * np.sin(self.freq * t)

    def rate(self, t: float) -> float:
        if self.schedule is Schedule.CONSTANT:
            return 0.0
        if self.schedule is Schedule.LINEAR:
            return self.omega
        return self.eps * self.freq * np.cos(self.freq * t)

    def _check(self, algebra: AlgebraDescriptor):
        if _ALGEBRA_FOR[self.family] is not algebra.kind:
            raise ValueError(f"{self.family.value} path cannot act on {algebra.kind.value}")

    def _profile(self, algebra: AlgebraDescriptor) -> np.ndarray:
        return np.sin(self.mode * algebra.grid)

    def element(self, t: float, algebra: AlgebraDescriptor) -> GroupElem:
        self._check(algebra)
        th = self.angle(t)
        if self.family is PathFamily.ROTATION_S1:
            return rotation(algebra, th)
        ax = np.asarray(self.axis)
        if self.family is PathFamily.SO3_PATH:
            return rotation(algebra, th * ax)
        if self.family is PathFamily.CONST_GAUGE:
            return rotation(algebra, np.tile(th * ax, (algebra.grid_size, 1)))
        return rotation(algebra, np.outer(th * self._profile(algebra), ax))

    def velocity(self, t: float, algebra: AlgebraDescriptor) -> AlgElem:
        """Closed-form right logarithmic derivative ``h' h^{-1}``."""
        self._check(algebra)
        r = self.rate(t)
        if self.family is PathFamily.ROTATION_S1:
            return AlgElem(algebra, np.full(algebra.grid_size, r))
        ax = np.asarray(self.axis)
        if self.family is PathFamily.SO3_PATH:
            return AlgElem(algebra, r * ax)
        if self.family is PathFamily.CONST_GAUGE:
            return AlgElem(algebra, np.tile(r * ax, (algebra.grid_size, 1)))
        return AlgElem(algebra, np.outer(r * self._profile(algebra), ax))

    def to_dict(self) -> dict:
        out = {"family": self.family.value, "schedule": self.schedule.value,
               "theta0": self.theta0, "omega": self.omega, "eps": self.eps,
               "freq": self.freq, "axis": list(self.axis)}
        if self.family is PathFamily.LOCAL_GAUGE:
            out["mode"] = self.mode
        return out


@dataclass(frozen=True)
class ComposedPath:
    """Pointwise product ``h1(t) h2(t)``; ``dr(h1 h2) = dr h1 + Ad_{h1} dr h2``."""

    first: HPath
    second: HPath

    @property
    def name(self) -> str:
        return f"({self.first.name})*({self.second.name})"

    def element(self, t, algebra):
        return compose(self.first.element(t, algebra), self.second.element(t, algebra))

    def velocity(self, t, algebra):
        return self.first.velocity(t, algebra) + group_ad(
            self.first.element(t, algebra), self.second.velocity(t, algebra))


def numeric_right_derivative(path, t: float, algebra: AlgebraDescriptor, h: float = 1e-4) -> AlgElem:
    """Finite-difference ``d/ds h(s) h(t)^{-1}`` at ``s = t`` (4th-order stencil)."""
    inv = inverse(path.element(t, algebra))
    if algebra.kind is AlgebraKind.VECT_S1:
        ang = lambda s: compose(path.element(s, algebra), inv).angle
        d = (-ang(t + 2 * h) + 8 * ang(t + h) - 8 * ang(t - h) + ang(t - 2 * h)) / (12 * h)
        return AlgElem(algebra, np.full(algebra.grid_size, d))
    mat = lambda s: compose(path.element(s, algebra), inv).data
    d = (-mat(t + 2 * h) + 8 * mat(t + h) - 8 * mat(t - h) + mat(t - 2 * h)) / (12 * h)
    return AlgElem(algebra, vee(d))


# ---------------------------------------------------------------------------
# curves


@dataclass(frozen=True)
class CurvePair:
    """A curve ``t -> (xi(t), a(t))``; ``a`` is None for parameter-free systems."""

    xi: Callable[[float], AlgElem]
    a: Callable[[float], AdvectedState | None] = lambda t: None

    def __call__(self, t: float):
        return self.xi(t), self.a(t)


def act_on_curve(path, c: CurvePair) -> CurvePair:
    """Pointwise-in-time path action ``(Ad_h xi + dr h, theta_h(a))``."""

    def xi(t):
        x = c.xi(t)
        return group_ad(path.element(t, x.desc), x) + path.velocity(t, x.desc)

    def a(t):
        val = c.a(t)
        if val is None:
            return None
        return act_group(path.element(t, val.desc.algebra), val)

    return CurvePair(xi, a)


def spline_curve(traj) -> CurvePair:
    """Not-a-knot cubic spline interpolant of a trajectory's (xi, a) samples."""
    xs = CubicSpline(traj.times, traj.xi, axis=0, bc_type="not-a-knot")
    algebra = traj.algebra
    if traj.a is None:
        return CurvePair(lambda t: AlgElem(algebra, xs(t)))
    as_ = CubicSpline(traj.times, traj.a, axis=0, bc_type="not-a-knot")
    action = traj.action

    def a(t):
        v = as_(t)
        if action.is_manifold:
            v = v / np.linalg.norm(v)
        return AdvectedState(action, v)

    return CurvePair(lambda t: AlgElem(algebra, xs(t)), a)


# ---------------------------------------------------------------------------
# reports


@dataclass
class CheckReport:
    name: str
    max_defect: float
    tolerance: float
    passed: bool
    expected_fail: bool = False
    worst: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        """True when the outcome matches expectation (a control is ok when it fails)."""
        return self.passed != self.expected_fail

    def to_dict(self) -> dict:
        out = {"name": self.name, "max_defect": float(self.max_defect),
               "tolerance": float(self.tolerance), "pass": bool(self.passed)}
        if self.expected_fail:
            out["expected_fail"] = True
        if self.worst:
            out["worst"] = self.worst
        if self.details:
            out["details"] = self.details
        return out


def _sup(x) -> float:
    x = np.asarray(x.coords if hasattr(x, "coords") else x)
    return float(np.max(np.abs(x))) if x.size else 0.0


def _tol_for(algebra: AlgebraDescriptor) -> float:
    return SO3_TOL if algebra.kind is AlgebraKind.SO3 else LATTICE_TOL


# ---------------------------------------------------------------------------
# checks on the Lagrangian


def _transform_point(path, t, xi: AlgElem, a: AdvectedState | None, eta: AlgElem | None):
    g = path.element(t, xi.desc)
    x2 = group_ad(g, xi) + path.velocity(t, xi.desc)
    if eta is not None:
        x2 = x2 + eta
    a2 = None if a is None else act_group(g, a)
    return g, x2, a2


def check_lagrangian_invariance(lag, path, samples, *, name="lagrangian_invariance",
                                tolerance=None, expected_fail=False) -> CheckReport:
    """``samples``: iterable of ``(xi, a, t, eta)`` with ``eta`` in the isotropy algebra (or None)."""
    tol = _tol_for(lag.algebra) if tolerance is None else tolerance
    worst, worst_info = 0.0, {}
    for i, (xi, a, t, eta) in enumerate(samples):
        _, x2, a2 = _transform_point(path, t, xi, a, eta)
        d = abs(lag.value(x2, a2) - lag.value(xi, a))
        if d > worst or i == 0:
            worst, worst_info = d, {"sample": i, "t": float(t)}
    return CheckReport(name, worst, tol, worst <= tol, expected_fail, worst_info,
                       {"path": _path_name(path), "lagrangian": lag.name})


def check_derivative_equivariance(lag, path, samples, *, name="derivative_equivariance",
                                  tolerance=1e-9, expected_fail=False) -> CheckReport:
    """Equivariance of ``dl/dxi`` and ``dl/da`` under the path action, at sampled points."""
    worst, worst_info = 0.0, {}
    for i, (xi, a, t, eta) in enumerate(samples):
        g, x2, a2 = _transform_point(path, t, xi, a, eta)
        ginv = inverse(g)
        ref = group_ad_star(ginv, lag.d_xi(xi, a))
        d = _sup(lag.d_xi(x2, a2) - ref) / max(1.0, _sup(ref))
        if a is not None:
            va = transport_dual(g, lag.d_a(xi, a), a.desc)
            da = _sup(lag.d_a(x2, a2) - va) / max(1.0, _sup(va))
            d = max(d, da)
        if d > worst or i == 0:
            worst, worst_info = d, {"sample": i, "t": float(t)}
    return CheckReport(name, worst, tolerance, worst <= tolerance, expected_fail, worst_info,
                       {"path": _path_name(path), "lagrangian": lag.name})


def _path_name(path) -> str:
    return getattr(path, "name", str(path))


# ---------------------------------------------------------------------------
# checks on the equations


def _residual_pair(system, path, curve: CurvePair, t: float, h: float, mode: str):
    """Return (residual of c, residual of h.c, advection residuals) at ``t``."""
    lag, family = system.lagrangian, system.family
    moved = act_on_curve(path, curve)

    mu_of = lambda s: lag.d_xi(*curve(s))
    v_of = (lambda s: lag.d_a(*curve(s))) if family is not EquationFamily.PLAIN else None
    xi, a = curve(t)
    base = ep_operator(family, mu_of, v_of, xi, a, t, h)

    xi2, a2 = moved(t)
    if mode == "evaluate":
        mu2_of = lambda s: lag.d_xi(*moved(s))
        v2_of = (lambda s: lag.d_a(*moved(s))) if v_of else None
    elif mode == "transport":
        def mu2_of(s):
            return group_ad_star(inverse(path.element(s, system.algebra)), mu_of(s))

        def v2_of(s):
            return transport_dual(path.element(s, system.algebra), v_of(s), system.action)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    moved_res = ep_operator(family, mu2_of, v2_of if v_of else None, xi2, a2, t, h)

    g = path.element(t, system.algebra)
    expected = group_ad_star(inverse(g), base)
    ep_def = _sup(moved_res - expected) / (1.0 + _sup(base))
    adv_def = 0.0
    if a is not None:
        adv = advection_residual(family, curve, t, h)
        adv2 = advection_residual(family, moved, t, h)
        adv_exp = act_linear(g, AdvectedState(a.desc, adv)) if not a.desc.is_manifold \
            else (g.data if a.desc.sigma == 1 else g.data.T) @ adv
        adv_def = _sup(adv2 - adv_exp) / (1.0 + _sup(adv))
    return ep_def, adv_def, _sup(base)


def check_residual_equivariance(system, path, curve: CurvePair, times, *, h=1e-3,
                                mode="evaluate", name="residual_equivariance",
                                tolerance=RESIDUAL_TOL, expected_fail=False) -> CheckReport:
    """``max_t |R(h.c) - Ad*_{h^-1} R(c)| / (1 + |R(c)|)`` over the EP and advection residuals."""
    worst, worst_info, base_max = 0.0, {}, 0.0
    for t in times:
        ep_d, adv_d, base = _residual_pair(system, path, curve, float(t), h, mode)
        base_max = max(base_max, base)
        d = max(ep_d, adv_d)
        if d > worst or not worst_info:
            worst, worst_info = d, {"t": float(t), "ep": ep_d, "advection": adv_d}
    return CheckReport(name, worst, tolerance, worst <= tolerance, expected_fail, worst_info,
                       {"path": _path_name(path), "mode": mode, "system": system.name,
                        "base_residual_max": base_max})


def _solution_residuals(system, curve: CurvePair, times, h, mode, path=None, base_curve=None):
    lag, family = system.lagrangian, system.family
    worst = 0.0
    worst_t = None
    for t in times:
        xi, a = curve(t)
        if mode == "transport" and path is not None:
            mu_of = lambda s: group_ad_star(inverse(path.element(s, system.algebra)),
                                            lag.d_xi(*base_curve(s)))
            v_of = (lambda s: transport_dual(path.element(s, system.algebra),
                                             lag.d_a(*base_curve(s)), system.action)) \
                if family is not EquationFamily.PLAIN else None
        else:
            mu_of = lambda s: lag.d_xi(*curve(s))
            v_of = (lambda s: lag.d_a(*curve(s))) if family is not EquationFamily.PLAIN else None
        r = _sup(ep_operator(family, mu_of, v_of, xi, a, t, h))
        if a is not None:
            r = max(r, _sup(advection_residual(family, curve, t, h)))
        if r > worst or worst_t is None:
            worst, worst_t = r, float(t)
    return worst, worst_t


def check_solution_transport(system, path, init, T: float, dt: float, *, mode="evaluate",
                             max_times: int = 400, name="solution_transport", floor=None,
                             expected_fail=False, trajectory=None) -> CheckReport:
    """Integrate, transform the solution by ``path`` and measure the equation residuals.

    Residuals use the stencil step ``h = dt`` at trajectory knots, skipping two
    steps at each end; at most ``max_times`` evenly strided knots are used.
    PASS iff the transformed sup-norm residual is at most ten times the
    untransformed one plus ``floor`` (the system's ``transport_floor``, 1e-6
    unless the system declares otherwise).
    """
    if floor is None:
        floor = getattr(system, "transport_floor", RESIDUAL_TOL)
    traj = trajectory if trajectory is not None else integrate(system, init[0], init[1], T, dt)
    curve = spline_curve(traj)
    moved = act_on_curve(path, curve)
    inner = np.arange(2, len(traj) - 2)
    stride = max(1, int(np.ceil(len(inner) / max_times)))
    times = traj.times[inner[::stride]]
    h = traj.dt
    base, _ = _solution_residuals(system, curve, times, h, "evaluate")
    moved_res, worst_t = _solution_residuals(system, moved, times, h, mode, path, curve)
    tol = 10.0 * base + floor
    return CheckReport(name, moved_res, tol, moved_res <= tol, expected_fail,
                       {"t": worst_t},
                       {"path": _path_name(path), "mode": mode, "system": system.name,
                        "base_residual": base, "T": T, "dt": dt, "times_checked": int(len(times))})


def identity_path(algebra: AlgebraDescriptor) -> HPath:
    fam = {AlgebraKind.SO3: PathFamily.SO3_PATH, AlgebraKind.VECT_S1: PathFamily.ROTATION_S1,
           AlgebraKind.GAUGE_SO3: PathFamily.CONST_GAUGE}[algebra.kind]
    return HPath(fam, Schedule.CONSTANT, label="identity")
