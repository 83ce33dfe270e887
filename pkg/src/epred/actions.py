"""Group actions on parameter spaces, diamond operators, cocycles and momentum maps.

Parameter kinds:

``LINEAR_R3``        R^3 with the rotation action (the heavy-top gravity vector).
``SPHERE_SO3``       unit vectors with the rotation action (nematic director).
``DENSITY_S1``       grid densities on the circle, moved by rigid rotations.
``CONNECTION_GAUGE`` so(3)-valued lattice connections; with the
                     ``GAUGE_LOG_DERIVATIVE`` cocycle the gauge group acts affinely,
                     ``gamma -> Ad_g gamma - (Dg) g^-1``.

``sigma`` selects the orientation of the rotation action on R^3 / S^2. ``+1`` is
the left action ``a -> R a`` (infinitesimally ``xi x a``). ``-1`` wires the
right action ``a -> R^T a`` (infinitesimally ``-xi x a``); it satisfies every
pairing identity but not the left-action axiom, which is what the negative
controls exercise.

Equivariance defect of the Lie-algebra cocycle, checked numerically on random
lattice maps (see ``dc_equivariance_sides``)::

    dc(Ad_g xi) - Ad_g dc(xi) = [c(g), Ad_g xi] = c(g) x (Ad_g xi)

i.e. minus the infinitesimal action of ``Ad_g xi`` on ``c(g)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .algebra import (
    AlgebraDescriptor,
    AlgebraKind,
    AlgElem,
    cross,
    DescriptorMismatch,
    DualElem,
    GroupElem,
    grid_derivative,
    fourier_shift,
    group_ad,
    vee,
)

__all__ = [
    "ActionKind",
    "CocycleKind",
    "ActionDescriptor",
    "AdvectedState",
    "act_group",
    "act_linear",
    "transport_dual",
    "act_infinitesimal",
    "infinitesimal_generator",
    "diamond",
    "cocycle_eval",
    "dc_eval",
    "dc_transpose",
    "momentum_map",
    "pair_parameter",
    "tangent_project",
    "dc_equivariance_sides",
]

_UNIT_TOL = 1e-10


class ActionKind(str, enum.Enum):
    LINEAR_R3 = "LINEAR_R3"
    DENSITY_S1 = "DENSITY_S1"
    CONNECTION_GAUGE = "CONNECTION_GAUGE"
    SPHERE_SO3 = "SPHERE_SO3"


class CocycleKind(str, enum.Enum):
    NONE = "NONE"
    GAUGE_LOG_DERIVATIVE = "GAUGE_LOG_DERIVATIVE"


_COMPATIBLE = {
    ActionKind.LINEAR_R3: AlgebraKind.SO3,
    ActionKind.SPHERE_SO3: AlgebraKind.SO3,
    ActionKind.DENSITY_S1: AlgebraKind.VECT_S1,
    ActionKind.CONNECTION_GAUGE: AlgebraKind.GAUGE_SO3,
}


@dataclass(frozen=True)
class ActionDescriptor:
    kind: ActionKind
    algebra: AlgebraDescriptor
    sigma: int = 1
    cocycle: CocycleKind = CocycleKind.NONE

    def __post_init__(self):
        if _COMPATIBLE[self.kind] is not self.algebra.kind:
            raise DescriptorMismatch(f"{self.kind.value} cannot act through {self.algebra.kind.value}")
        if self.sigma not in (1, -1):
            raise ValueError("sigma must be +1 or -1")
        if self.cocycle is CocycleKind.GAUGE_LOG_DERIVATIVE and self.kind is not ActionKind.CONNECTION_GAUGE:
            raise DescriptorMismatch("the log-derivative cocycle only exists on lattice connections")

    @property
    def shape(self) -> tuple[int, ...]:
        if self.kind in (ActionKind.LINEAR_R3, ActionKind.SPHERE_SO3):
            return (3,)
        if self.kind is ActionKind.DENSITY_S1:
            return (self.algebra.grid_size,)
        return (self.algebra.grid_size, 3)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def is_manifold(self) -> bool:
        return self.kind is ActionKind.SPHERE_SO3

    @property
    def affine(self) -> bool:
        return self.cocycle is not CocycleKind.NONE


class AdvectedState:
    """A parameter value ``a`` (vector space) or point ``m`` (sphere) with its action."""

    __slots__ = ("desc", "value")

    def __init__(self, desc: ActionDescriptor, value, *, positive: bool = False):
        arr = np.array(value, dtype=float).reshape(-1)
        if arr.size != desc.size:
            raise DescriptorMismatch(f"{desc.kind.value} expects {desc.size} values, got {arr.size}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("advected state must be finite")
        if desc.is_manifold and abs(np.linalg.norm(arr) - 1.0) > _UNIT_TOL:
            raise ValueError("sphere point must have unit norm")
        if positive and np.any(arr <= 0):
            raise ValueError("density must be strictly positive")
        arr.flags.writeable = False
        object.__setattr__(self, "desc", desc)
        object.__setattr__(self, "value", arr)

    def __setattr__(self, name, value):
        raise AttributeError("AdvectedState is immutable")

    @property
    def field(self) -> np.ndarray:
        return self.value.reshape(self.desc.shape)

    def replace(self, value) -> "AdvectedState":
        return AdvectedState(self.desc, value)

    def __repr__(self):
        return f"AdvectedState({self.desc.kind.value}, {self.field!r})"


def _check(desc: ActionDescriptor, algebra: AlgebraDescriptor):
    if desc.algebra != algebra:
        raise DescriptorMismatch(f"action over {desc.algebra} used with {algebra}")


def _rotate_sites(mats: np.ndarray, vecs: np.ndarray, transpose=False) -> np.ndarray:
    sub = "jba,jb->ja" if transpose else "jab,jb->ja"
    return np.einsum(sub, mats, vecs)


def _linear(g: GroupElem, flat: np.ndarray, d: ActionDescriptor) -> np.ndarray:
    _check(d, g.desc)
    if d.kind in (ActionKind.LINEAR_R3, ActionKind.SPHERE_SO3):
        mat = g.data if d.sigma == 1 else g.data.T
        return mat @ flat
    if d.kind is ActionKind.DENSITY_S1:
        # rigid rotations have unit Jacobian
        return fourier_shift(flat, g.angle)
    return _rotate_sites(g.data, flat.reshape(d.shape)).reshape(-1)


def act_linear(g: GroupElem, a: AdvectedState) -> np.ndarray:
    """Linear part ``rho*_g(a)`` of the action, as a flat array."""
    return _linear(g, a.value, a.desc)


def act_group(g: GroupElem, a: AdvectedState) -> AdvectedState:
    """``theta_g(a) = rho*_g(a) + c(g)``; the cocycle term is present only for affine actions."""
    out = act_linear(g, a)
    if a.desc.affine:
        out = out + cocycle_eval(g)
    if a.desc.is_manifold:
        out = out / np.linalg.norm(out)
    return AdvectedState(a.desc, out)


def transport_dual(g: GroupElem, v, desc: ActionDescriptor) -> np.ndarray:
    """``rho_{g^-1}(v)`` on the pairing dual of the parameter space.

    All parameter actions here are isometries of the parameter pairing, so this
    is the linear part of the action applied to ``v``.
    """
    return _linear(g, _as_flat(v), desc)


def _as_flat(v) -> np.ndarray:
    return np.asarray(v, dtype=float).reshape(-1)


def act_infinitesimal(x: AlgElem, a: AdvectedState) -> np.ndarray:
    """Linear infinitesimal action ``xi a`` (tangent vector, flat array)."""
    d = a.desc
    _check(d, x.desc)
    if d.kind in (ActionKind.LINEAR_R3, ActionKind.SPHERE_SO3):
        return d.sigma * cross(x.coords, a.value)
    if d.kind is ActionKind.DENSITY_S1:
        return -grid_derivative(a.value * x.coords, x.desc.spacing)
    return cross(x.field, a.field).reshape(-1)


def infinitesimal_generator(x: AlgElem, a: AdvectedState) -> np.ndarray:
    """Full generator ``xi_{V*}(a) = xi a + dc(xi)`` (``dc`` only for affine actions)."""
    out = act_infinitesimal(x, a)
    if a.desc.affine:
        out = out + dc_eval(x)
    return out


def pair_parameter(v, b, desc: ActionDescriptor) -> float:
    """Pairing between a parameter tangent ``b`` and a dual-parameter vector ``v``."""
    s = float(_as_flat(v) @ _as_flat(b))
    if desc.kind in (ActionKind.DENSITY_S1, ActionKind.CONNECTION_GAUGE):
        s *= desc.algebra.spacing
    return s


def diamond(v, a: AdvectedState) -> DualElem:
    """``v <> a`` defined by ``<v <> a, xi> = <xi a, v>``."""
    d = a.desc
    v = _as_flat(v)
    if v.size != d.size:
        raise DescriptorMismatch("dual parameter has the wrong size")
    if d.kind is ActionKind.LINEAR_R3:
        return DualElem(d.algebra, d.sigma * cross(a.value, v))
    if d.kind is ActionKind.DENSITY_S1:
        return DualElem(d.algebra, a.value * grid_derivative(v, d.algebra.spacing))
    if d.kind is ActionKind.CONNECTION_GAUGE:
        # -ad*_gamma alpha, pointwise
        return DualElem(d.algebra, cross(a.field, v.reshape(d.shape)))
    raise DescriptorMismatch("diamond needs a vector-space parameter; use momentum_map on manifolds")


def cocycle_eval(g: GroupElem) -> np.ndarray:
    """``c(g) = -(Dg) g^-1`` site by site, returned un-hatted as a flat (N*3,) array."""
    if g.desc.kind is not AlgebraKind.GAUGE_SO3:
        raise DescriptorMismatch("the log-derivative cocycle needs a lattice gauge map")
    dg = grid_derivative(g.data, g.desc.spacing)
    return -vee(np.einsum("jab,jcb->jac", dg, g.data)).reshape(-1)


def dc_eval(x: AlgElem) -> np.ndarray:
    """Infinitesimal cocycle ``dc(xi) = -D xi``."""
    if x.desc.kind is not AlgebraKind.GAUGE_SO3:
        raise DescriptorMismatch("dc is only defined on the lattice gauge algebra")
    return -grid_derivative(x.field, x.desc.spacing).reshape(-1)


def dc_transpose(v, algebra: AlgebraDescriptor) -> DualElem:
    """``dc^T(alpha) = D alpha``, the transpose of ``dc`` for the lattice pairings."""
    if algebra.kind is not AlgebraKind.GAUGE_SO3:
        raise DescriptorMismatch("dc^T is only defined on the lattice gauge algebra")
    v = _as_flat(v).reshape(algebra.grid_size, 3)
    return DualElem(algebra, grid_derivative(v, algebra.spacing))


def tangent_project(m: np.ndarray, p: np.ndarray) -> np.ndarray:
    m = _as_flat(m)
    p = _as_flat(p)
    return p - (p @ m) * m


def momentum_map(a: AdvectedState, v) -> DualElem:
    """Cotangent momentum map ``J(a, v)`` with ``<J, xi> = <v, xi_{V*}(a)>``."""
    d = a.desc
    v = _as_flat(v)
    if d.kind is ActionKind.SPHERE_SO3:
        return DualElem(d.algebra, d.sigma * cross(a.value, v))
    out = diamond(v, a)
    if d.affine:
        out = out + dc_transpose(v, d.algebra)
    return out


def dc_equivariance_sides(g: GroupElem, x: AlgElem) -> tuple[np.ndarray, np.ndarray]:
    """Both sides of ``dc(Ad_g xi) - Ad_g dc(xi) = c(g) x Ad_g xi`` as (N, 3) arrays."""
    gx = group_ad(g, x)
    lhs = dc_eval(gx).reshape(-1, 3) - _rotate_sites(g.data, dc_eval(x).reshape(-1, 3))
    rhs = cross(cocycle_eval(g).reshape(-1, 3), gx.field)
    return lhs, rhs
