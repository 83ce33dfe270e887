"""Reduced Lagrangians, their functional derivatives and inertia solves.

Every Lagrangian works on raw coordinate arrays internally (``_value``,
``_d_xi``, ``_d_a``) and exposes typed wrappers. Derivatives are taken with
respect to the pairings of :mod:`epred.algebra` and :mod:`epred.actions`, so on a
grid ``d_xi`` is the discrete L2 gradient (no ``1/dx`` factors leak out).

Degenerate inertia operators are inverted on the complement of their kernel.
On a grid the 4th-order stencil also annihilates the alternating (Nyquist)
mode; it is treated as part of the numerical kernel, next to the declared
kernel of constant fields.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .actions import ActionDescriptor, AdvectedState, tangent_project
from .algebra import (
    AlgebraDescriptor,
    AlgElem,
    cross,
    DualElem,
    grid_derivative,
    modified_wavenumber,
)

__all__ = [
    "CompatibilityError",
    "ReducedLagrangian",
    "HeavyTopLagrangian",
    "NematicLagrangian",
    "HunterSaxtonLagrangian",
    "DensityHSLagrangian",
    "SpinLagrangian",
    "fd_d_xi",
    "fd_d_a",
    "builtin_lagrangians",
]

INERTIA_TOL = 1e-8


class CompatibilityError(ValueError):
    """A momentum has a component along the kernel of the inertia operator."""


class ReducedLagrangian:
    """Base class. Subclasses implement the raw-array hooks."""

    name = "lagrangian"
    integrable = True

    def __init__(self, algebra: AlgebraDescriptor, action: ActionDescriptor | None = None):
        self.algebra = algebra
        self.action = action

    # raw hooks
    def _value(self, xi, a):
        raise NotImplementedError

    def _d_xi(self, xi, a):
        raise NotImplementedError

    def _d_a(self, xi, a):
        return None

    def _solve(self, mu, a):
        raise NotImplementedError(f"{self.name} has no inertia solve")

    def kernel(self, a: AdvectedState | None = None) -> list[np.ndarray]:
        """Declared kernel of the inertia operator (identified with the isotropy algebra)."""
        return []

    def null_modes(self, a: AdvectedState | None = None) -> list[np.ndarray]:
        """Orthonormal basis (Euclidean on coordinates) of the numerical kernel."""
        return [k / np.linalg.norm(k) for k in self.kernel(a)]

    # typed API
    def value(self, xi: AlgElem, a: AdvectedState | None = None) -> float:
        return float(self._value(xi.coords, _raw(a)))

    def d_xi(self, xi: AlgElem, a: AdvectedState | None = None) -> DualElem:
        return DualElem(self.algebra, self._d_xi(xi.coords, _raw(a)))

    def d_a(self, xi: AlgElem, a: AdvectedState | None = None) -> np.ndarray | None:
        """Parameter derivative; on the sphere it is the tangential covector."""
        return self._d_a(xi.coords, _raw(a))

    def kernel_component(self, mu: DualElem, a: AdvectedState | None = None) -> float:
        comps = [abs(float(k @ mu.coords)) for k in self.null_modes(a)]
        return max(comps, default=0.0)

    def inertia_solve(self, mu: DualElem, a: AdvectedState | None = None,
                      tol: float = INERTIA_TOL) -> AlgElem:
        """Preimage of ``mu`` under ``xi -> d_xi(xi, a)`` with no kernel component."""
        if not self.integrable:
            raise NotImplementedError(f"{self.name} is used for invariance checks only")
        scale = max(1.0, float(np.linalg.norm(mu.coords)))
        comp = self.kernel_component(mu, a)
        if comp > tol * scale:
            raise CompatibilityError(
                f"{self.name}: momentum has kernel component {comp:.3e} (tolerance {tol * scale:.1e})")
        coords = np.array(mu.coords)
        for k in self.null_modes(a):
            coords -= (k @ coords) * k
        return AlgElem(self.algebra, self._solve(coords, _raw(a)))


def _raw(a):
    return None if a is None else a.value


# ---------------------------------------------------------------------------
# rigid bodies


class HeavyTopLagrangian(ReducedLagrangian):
    """``l(Omega, Gamma) = 1/2 I Omega . Omega - Gamma . lambda``."""

    name = "heavy_top"

    def __init__(self, algebra, action, inertia, lam):
        super().__init__(algebra, action)
        self.inertia = np.asarray(inertia, dtype=float)
        self.lam = np.asarray(lam, dtype=float)

    def _value(self, xi, a):
        return 0.5 * xi @ (self.inertia * xi) - a @ self.lam

    def _d_xi(self, xi, a):
        return self.inertia * xi

    def _d_a(self, xi, a):
        return -self.lam.copy()

    def _solve(self, mu, a):
        return mu / self.inertia


class NematicLagrangian(ReducedLagrangian):
    """``l(xi, m) = 1/2 j |P xi|^2 - lambda/2 <m, k>^2``.

    ``P`` is the identity, or the projection onto ``k``-perp when ``projected``.
    """

    def __init__(self, algebra, action, j, lam, k, projected=False):
        super().__init__(algebra, action)
        self.j = float(j)
        self.lam = float(lam)
        self.k = np.asarray(k, dtype=float)
        self.projected = projected
        self.name = "nematic_projected" if projected else "nematic"
        self._proj = np.eye(3) - np.outer(self.k, self.k) if projected else np.eye(3)

    def _value(self, xi, a):
        px = self._proj @ xi
        return 0.5 * self.j * px @ px - 0.5 * self.lam * (a @ self.k) ** 2

    def _d_xi(self, xi, a):
        return self.j * (self._proj @ xi)

    def _d_a(self, xi, a):
        return tangent_project(a, -self.lam * (a @ self.k) * self.k)

    def kernel(self, a=None):
        return [self.k.copy()] if self.projected else []

    def _solve(self, mu, a):
        return self._proj @ mu / self.j


# ---------------------------------------------------------------------------
# circle and lattice


@lru_cache(maxsize=None)
def _laplace_symbol(n: int) -> np.ndarray:
    """Symbol of ``-D D`` on the rfft frequencies (zero on constants and Nyquist)."""
    dx = 2.0 * np.pi / n
    return modified_wavenumber(np.arange(n // 2 + 1), dx) ** 2


def _poisson(mu: np.ndarray, n: int) -> np.ndarray:
    """Solve ``-D D xi = mu`` along axis 0 on mean-zero, Nyquist-free fields."""
    sym = _laplace_symbol(n)
    inv = np.zeros_like(sym)
    good = sym > 1e-12 * sym.max()
    inv[good] = 1.0 / sym[good]
    coeffs = np.fft.rfft(mu, axis=0) * inv.reshape((-1,) + (1,) * (mu.ndim - 1))
    return np.fft.irfft(coeffs, n=n, axis=0)


def _grid_null_modes(n: int, components: int = 1) -> list[np.ndarray]:
    const = np.full(n, 1.0 / np.sqrt(n))
    alt = np.where(np.arange(n) % 2 == 0, 1.0, -1.0) / np.sqrt(n)
    if components == 1:
        return [const, alt]
    out = []
    for base in (const, alt):
        for c in range(components):
            v = np.zeros((n, components))
            v[:, c] = base
            out.append(v.reshape(-1))
    return out


class HunterSaxtonLagrangian(ReducedLagrangian):
    """``l(u) = 1/2 sum (Du)^2 dx``; inertia ``-D D``, kernel = constant fields."""

    name = "hs1d"

    def _value(self, xi, a):
        w = grid_derivative(xi, self.algebra.spacing)
        return 0.5 * (w @ w) * self.algebra.spacing

    def _d_xi(self, xi, a):
        dx = self.algebra.spacing
        return -grid_derivative(grid_derivative(xi, dx), dx)

    def kernel(self, a=None):
        return [np.ones(self.algebra.grid_size)]

    def null_modes(self, a=None):
        return _grid_null_modes(self.algebra.grid_size)

    def _solve(self, mu, a):
        return _poisson(mu, self.algebra.grid_size)


@lru_cache(maxsize=None)
def _stencil_matrix(n: int) -> np.ndarray:
    return grid_derivative(np.eye(n), 2.0 * np.pi / n)


class DensityHSLagrangian(ReducedLagrangian):
    """``l(u, rho) = 1/2 sum rho (Du)^2 dx``; inertia ``-D(rho D .)``."""

    name = "density_hs1d"

    def __init__(self, algebra, action):
        super().__init__(algebra, action)
        # (rho bytes, Cholesky factor), replaced as a unit
        self._cache = (None, None)

    def _value(self, xi, a):
        w = grid_derivative(xi, self.algebra.spacing)
        return 0.5 * (a @ (w * w)) * self.algebra.spacing

    def _d_xi(self, xi, a):
        dx = self.algebra.spacing
        return -grid_derivative(a * grid_derivative(xi, dx), dx)

    def _d_a(self, xi, a):
        w = grid_derivative(xi, self.algebra.spacing)
        return 0.5 * w * w

    def kernel(self, a=None):
        return [np.ones(self.algebra.grid_size)]

    def null_modes(self, a=None):
        return _grid_null_modes(self.algebra.grid_size)

    def _factor(self, rho):
        key = rho.tobytes()
        cached_key, factor = self._cache
        if key != cached_key:
            n = self.algebra.grid_size
            d = _stencil_matrix(n)
            op = -d @ (rho[:, None] * d)
            basis = np.stack(_grid_null_modes(n), axis=1)
            op = 0.5 * (op + op.T) + basis @ basis.T
            factor = cho_factor(op)
            self._cache = (key, factor)
        return factor

    def _solve(self, mu, a):
        return cho_solve(self._factor(np.asarray(a)), mu)


class SpinLagrangian(ReducedLagrangian):
    """Gauge-invariant spin Lagrangians depending on ``D xi`` and ``gamma``.

    ``variant=1``: ``1/2 sum |D xi x gamma|^2 dx``
    ``variant=2``: ``1/2 sum (D xi . gamma)^2 dx``
    ``variant=3``: ``sum (|D xi|^2 - |gamma|^2) dx`` (the only integrable one)
    """

    def __init__(self, algebra, action, variant=3):
        super().__init__(algebra, action)
        if variant not in (1, 2, 3):
            raise ValueError("spin Lagrangian variant must be 1, 2 or 3")
        self.variant = variant
        self.name = f"spin_l{variant}"
        self.integrable = variant == 3

    def _fields(self, xi, a):
        n = self.algebra.grid_size
        w = grid_derivative(xi.reshape(n, 3), self.algebra.spacing)
        return w, a.reshape(n, 3)

    def _value(self, xi, a):
        w, g = self._fields(xi, a)
        dx = self.algebra.spacing
        if self.variant == 1:
            f = cross(w, g)
            return 0.5 * np.sum(f * f) * dx
        if self.variant == 2:
            return 0.5 * np.sum(np.sum(w * g, axis=1) ** 2) * dx
        return (np.sum(w * w) - np.sum(g * g)) * dx

    def _d_xi(self, xi, a):
        w, g = self._fields(xi, a)
        if self.variant == 1:
            flux = cross(g, cross(w, g))
        elif self.variant == 2:
            flux = np.sum(w * g, axis=1)[:, None] * g
        else:
            flux = 2.0 * w
        return -grid_derivative(flux, self.algebra.spacing).reshape(-1)

    def _d_a(self, xi, a):
        w, g = self._fields(xi, a)
        if self.variant == 1:
            out = cross(cross(w, g), w)
        elif self.variant == 2:
            out = np.sum(w * g, axis=1)[:, None] * w
        else:
            out = -2.0 * g
        return out.reshape(-1)

    def kernel(self, a=None):
        n = self.algebra.grid_size
        out = []
        for c in range(3):
            v = np.zeros((n, 3))
            v[:, c] = 1.0
            out.append(v.reshape(-1))
        return out

    def null_modes(self, a=None):
        return _grid_null_modes(self.algebra.grid_size, components=3)

    def _solve(self, mu, a):
        n = self.algebra.grid_size
        return (_poisson(mu.reshape(n, 3), n) / 2.0).reshape(-1)


# ---------------------------------------------------------------------------
# finite-difference oracles


def _fd_step(xi: np.ndarray) -> float:
    return 1e-6 * max(1.0, float(np.max(np.abs(xi))) if xi.size else 1.0)


def fd_d_xi(lag: ReducedLagrangian, xi: AlgElem, a: AdvectedState | None, eta: AlgElem) -> float:
    """Central difference of ``t -> l(xi + t eta, a)`` at 0."""
    h = _fd_step(xi.coords)
    ar = _raw(a)
    fp = lag._value(xi.coords + h * eta.coords, ar)
    fm = lag._value(xi.coords - h * eta.coords, ar)
    if not (np.isfinite(fp) and np.isfinite(fm)):
        raise ValueError("non-finite Lagrangian value in finite difference")
    return float((fp - fm) / (2.0 * h))


def fd_d_a(lag: ReducedLagrangian, xi: AlgElem, a: AdvectedState, b) -> float:
    """Central difference of ``t -> l(xi, a + t b)`` at 0 (ambient for sphere points)."""
    h = _fd_step(a.value)
    b = np.asarray(b, dtype=float).reshape(-1)
    fp = lag._value(xi.coords, a.value + h * b)
    fm = lag._value(xi.coords, a.value - h * b)
    if not (np.isfinite(fp) and np.isfinite(fm)):
        raise ValueError("non-finite Lagrangian value in finite difference")
    return float((fp - fm) / (2.0 * h))


def builtin_lagrangians(n: int = 128) -> dict[str, ReducedLagrangian]:
    """The eight shipped Lagrangians with their default parameters."""
    from . import systems

    out = {}
    for name in ("heavy_top", "nematic", "nematic_projected", "hs1d", "density_hs1d"):
        params = {"N": n} if name in ("hs1d", "density_hs1d") else {}
        out[name] = systems.build_system(name, params).lagrangian
    for variant in (1, 2, 3):
        sys_ = systems.build_system("spin_lattice", {"N": n, "lagrangian": f"l{variant}"})
        out[f"spin_l{variant}"] = sys_.lagrangian
    return out
