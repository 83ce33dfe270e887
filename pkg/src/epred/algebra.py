"""Coordinate realizations of the Lie algebras used by the example systems.

Three concrete algebras are supported, all in the right-invariant convention
(algebra velocity ``xi = g' g^{-1}``):

* ``SO3``       -- so(3) identified with R^3 through the hat map, bracket = cross product.
* ``VECT_S1``   -- vector fields on the circle, sampled on a uniform periodic grid of
                   ``N`` nodes; spatial derivatives use the 4th-order central stencil.
* ``GAUGE_SO3`` -- so(3)-valued functions on the same periodic grid (pointwise cross
                   product), the Lie algebra of the lattice gauge group.

A ``PRODUCT`` descriptor glues algebras together as a direct product.

Dual spaces are identified with the primal coordinate space; ``pair`` realizes the
duality (Euclidean on so(3), the discrete L2 product ``sum(mu * x) * dx`` on grids).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "AlgebraKind",
    "AlgebraDescriptor",
    "AlgElem",
    "DualElem",
    "GroupElem",
    "DescriptorMismatch",
    "so3",
    "vect_s1",
    "gauge_so3",
    "product",
    "grid_derivative",
    "modified_wavenumber",
    "fourier_shift",
    "cross",
    "hat",
    "vee",
    "bracket",
    "ad_star",
    "group_ad",
    "group_ad_star",
    "exp_so3",
    "rotation",
    "identity",
    "compose",
    "inverse",
    "pair",
    "time_derivative",
]

_ORTHO_TOL = 1e-12


class DescriptorMismatch(ValueError):
    """Raised when two values living on different algebras are combined."""


class AlgebraKind(str, enum.Enum):
    SO3 = "SO3"
    VECT_S1 = "VECT_S1"
    GAUGE_SO3 = "GAUGE_SO3"
    PRODUCT = "PRODUCT"


@dataclass(frozen=True)
class AlgebraDescriptor:
    kind: AlgebraKind
    grid_size: int | None = None
    factors: tuple["AlgebraDescriptor", ...] = ()

    def __post_init__(self):
        if self.kind in (AlgebraKind.VECT_S1, AlgebraKind.GAUGE_SO3):
            n = self.grid_size
            if n is None or int(n) != n or n < 8 or n % 2:
                raise ValueError(f"grid size must be an even integer >= 8, got {n!r}")
        elif self.kind is AlgebraKind.PRODUCT:
            if not self.factors:
                raise ValueError("PRODUCT descriptor needs at least one factor")
        elif self.grid_size is not None:
            raise ValueError("grid_size is only meaningful for lattice algebras")

    @property
    def dim(self) -> int:
        if self.kind is AlgebraKind.SO3:
            return 3
        if self.kind is AlgebraKind.VECT_S1:
            return self.grid_size
        if self.kind is AlgebraKind.GAUGE_SO3:
            return 3 * self.grid_size
        return sum(f.dim for f in self.factors)

    @property
    def spacing(self) -> float:
        if self.grid_size is None:
            raise ValueError(f"{self.kind.value} has no grid")
        return 2.0 * np.pi / self.grid_size

    @property
    def grid(self) -> np.ndarray:
        return np.arange(self.grid_size) * self.spacing

    @property
    def field_shape(self) -> tuple[int, ...]:
        """Natural array shape of a coordinate vector."""
        if self.kind is AlgebraKind.SO3:
            return (3,)
        if self.kind is AlgebraKind.VECT_S1:
            return (self.grid_size,)
        if self.kind is AlgebraKind.GAUGE_SO3:
            return (self.grid_size, 3)
        return (self.dim,)

    def split(self, coords: np.ndarray) -> list[np.ndarray]:
        """Cut a PRODUCT coordinate vector into its factor blocks."""
        out, start = [], 0
        for f in self.factors:
            out.append(coords[start:start + f.dim])
            start += f.dim
        return out


def so3() -> AlgebraDescriptor:
    return AlgebraDescriptor(AlgebraKind.SO3)


def vect_s1(n: int) -> AlgebraDescriptor:
    return AlgebraDescriptor(AlgebraKind.VECT_S1, grid_size=n)


def gauge_so3(n: int) -> AlgebraDescriptor:
    return AlgebraDescriptor(AlgebraKind.GAUGE_SO3, grid_size=n)


def product(*factors: AlgebraDescriptor) -> AlgebraDescriptor:
    return AlgebraDescriptor(AlgebraKind.PRODUCT, factors=tuple(factors))


class _Coords:
    """Shared behaviour of algebra and dual elements (a vector space over R)."""

    desc: AlgebraDescriptor
    coords: np.ndarray

    def __init__(self, desc: AlgebraDescriptor, coords):
        arr = np.array(coords, dtype=float).reshape(-1)
        if arr.size != desc.dim:
            raise DescriptorMismatch(
                f"expected {desc.dim} coordinates for {desc.kind.value}, got {arr.size}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("coordinates must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "desc", desc)
        object.__setattr__(self, "coords", arr)

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    @property
    def field(self) -> np.ndarray:
        return self.coords.reshape(self.desc.field_shape)

    def _check(self, other):
        if type(other) is not type(self):
            raise TypeError(f"cannot combine {type(self).__name__} with {type(other).__name__}")
        if other.desc != self.desc:
            raise DescriptorMismatch(f"{self.desc} vs {other.desc}")

    def __add__(self, other):
        self._check(other)
        return type(self)(self.desc, self.coords + other.coords)

    def __sub__(self, other):
        self._check(other)
        return type(self)(self.desc, self.coords - other.coords)

    def __neg__(self):
        return type(self)(self.desc, -self.coords)

    def __mul__(self, s: float):
        return type(self)(self.desc, float(s) * self.coords)

    __rmul__ = __mul__

    def norm(self) -> float:
        return float(np.max(np.abs(self.coords))) if self.coords.size else 0.0

    def __repr__(self):
        return f"{type(self).__name__}({self.desc.kind.value}, {self.field!r})"

    @classmethod
    def zeros(cls, desc: AlgebraDescriptor):
        return cls(desc, np.zeros(desc.dim))


class AlgElem(_Coords):
    """An element of the Lie algebra (a velocity xi)."""


class DualElem(_Coords):
    """An element of the dual algebra (a momentum mu = dl/dxi)."""


@dataclass(frozen=True)
class GroupElem:
    """A group element acting on one of the algebras.

    ``data`` is a 3x3 rotation (SO3), an (N, 3, 3) stack of site rotations
    (GAUGE_SO3), or a scalar rigid-rotation angle (VECT_S1).
    """

    desc: AlgebraDescriptor
    data: np.ndarray | float = field(repr=False)

    def __post_init__(self):
        if self.desc.kind is AlgebraKind.VECT_S1:
            object.__setattr__(self, "data", float(self.data))
            return
        mats = np.array(self.data, dtype=float)
        expected = (3, 3) if self.desc.kind is AlgebraKind.SO3 else (self.desc.grid_size, 3, 3)
        if self.desc.kind is AlgebraKind.PRODUCT or mats.shape != expected:
            raise DescriptorMismatch(f"group data of shape {mats.shape} for {self.desc.kind.value}")
        eye = np.eye(3)
        gram = np.einsum("...ba,...bc->...ac", mats, mats)
        if np.max(np.abs(gram - eye)) > _ORTHO_TOL or np.max(np.abs(np.linalg.det(mats) - 1.0)) > _ORTHO_TOL:
            raise ValueError("group element is not a proper rotation")
        mats.flags.writeable = False
        object.__setattr__(self, "data", mats)

    @property
    def angle(self) -> float:
        return self.data


# ---------------------------------------------------------------------------
# grid calculus


def modified_wavenumber(k, dx: float):
    """Symbol of the 4th-order stencil: ``D exp(ikx) = i * kt * exp(ikx)``."""
    k = np.asarray(k, dtype=float)
    return (8.0 * np.sin(k * dx) - np.sin(2.0 * k * dx)) / (6.0 * dx)


def grid_derivative(f: np.ndarray, dx: float) -> np.ndarray:
    """4th-order central difference along axis 0 of a periodic grid function."""
    f = np.asarray(f, dtype=float)
    # differences first, so constants map to exact zeros
    d1 = np.roll(f, -1, axis=0) - np.roll(f, 1, axis=0)
    d2 = np.roll(f, -2, axis=0) - np.roll(f, 2, axis=0)
    return (8.0 * d1 - d2) / (12.0 * dx)


def fourier_shift(f: np.ndarray, theta: float) -> np.ndarray:
    """Return samples of ``x -> f(x - theta)`` for a periodic grid function.

    Exact multiples of the grid spacing are circular rolls; other angles use
    trigonometric interpolation (the Nyquist bin is kept real).
    """
    f = np.asarray(f, dtype=float)
    n = f.shape[0]
    dx = 2.0 * np.pi / n
    steps = theta / dx
    if abs(steps - round(steps)) < 1e-12:
        return np.roll(f, int(round(steps)), axis=0)
    k = np.arange(n // 2 + 1)
    phase = np.exp(-1j * k * theta)
    phase[-1] = np.cos(0.5 * n * theta)
    coeffs = np.fft.rfft(f, axis=0)
    coeffs *= phase.reshape((-1,) + (1,) * (f.ndim - 1))
    return np.fft.irfft(coeffs, n=n, axis=0)


# ---------------------------------------------------------------------------
# so(3)


def cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cross product over the last axis (``np.cross`` without its axis bookkeeping)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a0, a1, a2 = a[..., 0], a[..., 1], a[..., 2]
    b0, b1, b2 = b[..., 0], b[..., 1], b[..., 2]
    return np.stack([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0], axis=-1)


def hat(v: np.ndarray) -> np.ndarray:
    """Skew matrix of a vector (works on stacks of shape (..., 3))."""
    v = np.asarray(v, dtype=float)
    out = np.zeros(v.shape[:-1] + (3, 3))
    out[..., 0, 1] = -v[..., 2]
    out[..., 0, 2] = v[..., 1]
    out[..., 1, 0] = v[..., 2]
    out[..., 1, 2] = -v[..., 0]
    out[..., 2, 0] = -v[..., 1]
    out[..., 2, 1] = v[..., 0]
    return out


def vee(m: np.ndarray) -> np.ndarray:
    """Inverse of ``hat`` applied to the skew part of ``m``."""
    m = np.asarray(m, dtype=float)
    skew = 0.5 * (m - np.swapaxes(m, -1, -2))
    return np.stack([skew[..., 2, 1], skew[..., 0, 2], skew[..., 1, 0]], axis=-1)


def _rodrigues(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    theta = np.linalg.norm(v, axis=-1)[..., None, None]
    k = hat(v)
    k2 = k @ k
    small = theta < 1e-4
    t2 = theta ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        a = np.where(small, 1.0 - t2 / 6.0 + t2 ** 2 / 120.0, np.sin(theta) / np.where(small, 1.0, theta))
        b = np.where(small, 0.5 - t2 / 24.0 + t2 ** 2 / 720.0,
                     (1.0 - np.cos(theta)) / np.where(small, 1.0, t2))
    return np.eye(3) + a * k + b * k2


def exp_so3(x: AlgElem) -> GroupElem:
    """Rodrigues exponential; on GAUGE_SO3 it is applied site by site."""
    if x.desc.kind is AlgebraKind.SO3:
        return GroupElem(x.desc, _rodrigues(x.coords))
    if x.desc.kind is AlgebraKind.GAUGE_SO3:
        return GroupElem(x.desc, _rodrigues(x.field))
    raise DescriptorMismatch(f"exp is not available on {x.desc.kind.value}")


def rotation(desc: AlgebraDescriptor, value) -> GroupElem:
    """Build a group element from a rotation vector (SO3/GAUGE_SO3) or an angle (VECT_S1)."""
    if desc.kind is AlgebraKind.VECT_S1:
        return GroupElem(desc, float(value))
    return exp_so3(AlgElem(desc, value))


def identity(desc: AlgebraDescriptor) -> GroupElem:
    if desc.kind is AlgebraKind.VECT_S1:
        return GroupElem(desc, 0.0)
    if desc.kind is AlgebraKind.SO3:
        return GroupElem(desc, np.eye(3))
    return GroupElem(desc, np.broadcast_to(np.eye(3), (desc.grid_size, 3, 3)).copy())


def compose(g: GroupElem, h: GroupElem) -> GroupElem:
    if g.desc != h.desc:
        raise DescriptorMismatch(f"{g.desc} vs {h.desc}")
    if g.desc.kind is AlgebraKind.VECT_S1:
        return GroupElem(g.desc, g.angle + h.angle)
    return GroupElem(g.desc, g.data @ h.data)


def inverse(g: GroupElem) -> GroupElem:
    if g.desc.kind is AlgebraKind.VECT_S1:
        return GroupElem(g.desc, -g.angle)
    return GroupElem(g.desc, np.swapaxes(g.data, -1, -2))


# ---------------------------------------------------------------------------
# adjoint / coadjoint calculus


def _same(x, y):
    if x.desc != y.desc:
        raise DescriptorMismatch(f"{x.desc} vs {y.desc}")


def bracket(x: AlgElem, y: AlgElem) -> AlgElem:
    """``ad_x y``.

    Pointwise cross product on SO3/GAUGE_SO3; on VECT_S1
    ``(Du) v - u (Dv)``, the sign that makes ``d/dt Ad_h x = ad_{h' h^-1} Ad_h x``.
    """
    _same(x, y)
    d = x.desc
    if d.kind is AlgebraKind.SO3:
        return AlgElem(d, cross(x.coords, y.coords))
    if d.kind is AlgebraKind.GAUGE_SO3:
        return AlgElem(d, cross(x.field, y.field))
    if d.kind is AlgebraKind.VECT_S1:
        dx = d.spacing
        u, v = x.coords, y.coords
        return AlgElem(d, grid_derivative(u, dx) * v - u * grid_derivative(v, dx))
    parts = [bracket(AlgElem(f, a), AlgElem(f, b)).coords
             for f, a, b in zip(d.factors, d.split(x.coords), d.split(y.coords))]
    return AlgElem(d, np.concatenate(parts))


def ad_star(x: AlgElem, mu: DualElem) -> DualElem:
    """``ad*_x mu``, the exact transpose of ``y -> bracket(x, y)`` under ``pair``.

    On VECT_S1 this is ``(Du) m + D(u m)`` (continuum form ``u m' + 2 u' m``);
    the divergence form keeps the discrete duality and energy identities exact.
    """
    _same(x, mu)
    d = x.desc
    if d.kind is AlgebraKind.SO3:
        return DualElem(d, cross(mu.coords, x.coords))
    if d.kind is AlgebraKind.GAUGE_SO3:
        return DualElem(d, cross(mu.field, x.field))
    if d.kind is AlgebraKind.VECT_S1:
        dx = d.spacing
        u, m = x.coords, mu.coords
        return DualElem(d, grid_derivative(u, dx) * m + grid_derivative(u * m, dx))
    parts = [ad_star(AlgElem(f, a), DualElem(f, b)).coords
             for f, a, b in zip(d.factors, d.split(x.coords), d.split(mu.coords))]
    return DualElem(d, np.concatenate(parts))


def group_ad(g: GroupElem, x: AlgElem) -> AlgElem:
    """``Ad_g x``; on VECT_S1 a rigid rotation transports the field, ``x(. - theta)``."""
    _same(g, x)
    d = x.desc
    if d.kind is AlgebraKind.SO3:
        return AlgElem(d, g.data @ x.coords)
    if d.kind is AlgebraKind.GAUGE_SO3:
        return AlgElem(d, np.einsum("jab,jb->ja", g.data, x.field))
    return AlgElem(d, fourier_shift(x.coords, g.angle))


def group_ad_star(g: GroupElem, mu: DualElem) -> DualElem:
    """``Ad*_g mu`` with ``<Ad*_g mu, x> = <mu, Ad_g x>``."""
    _same(g, mu)
    d = mu.desc
    if d.kind is AlgebraKind.SO3:
        return DualElem(d, g.data.T @ mu.coords)
    if d.kind is AlgebraKind.GAUGE_SO3:
        return DualElem(d, np.einsum("jba,jb->ja", g.data, mu.field))
    return DualElem(d, fourier_shift(mu.coords, -g.angle))


def pair(mu: DualElem, x: AlgElem) -> float:
    _same(mu, x)
    d = x.desc
    if d.kind is AlgebraKind.SO3:
        return float(mu.coords @ x.coords)
    if d.kind is AlgebraKind.PRODUCT:
        return sum(pair(DualElem(f, a), AlgElem(f, b))
                   for f, a, b in zip(d.factors, d.split(mu.coords), d.split(x.coords)))
    return float(mu.coords @ x.coords) * d.spacing


def time_derivative(curve: Callable[[float], np.ndarray], t: float, h: float) -> np.ndarray:
    """4th-order central difference of a sampled curve at ``t``."""
    if not h > 0:
        raise ValueError("step must be positive")
    samples = [np.asarray(curve(t + s * h), dtype=float) for s in (2, 1, -1, -2)]
    for s in samples:
        if not np.all(np.isfinite(s)):
            raise ValueError(f"non-finite curve sample near t={t}")
    fp2, fp1, fm1, fm2 = samples
    return (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h)
