"""Probability measures ``mu(dx) = exp(-V(x)) dx / Z`` on the line, with quadrature.

A :class:`Potential` carries ``V`` and its derivatives. Discretising it on a
:class:`QuadratureRule` gives a :class:`DiscreteMeasure` whose weights already
include the normalised density, so every integral against ``mu`` becomes a
weighted sum.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Optional, Union

import numpy as np
from numpy.polynomial import hermite_e, legendre
from numpy.polynomial import polynomial as P

__all__ = [
    "QuadratureError",
    "QuadratureRule",
    "gauss_legendre",
    "gauss_hermite",
    "DiscreteMeasure",
    "Potential",
    "PotentialFamily",
    "gaussian",
    "build_u_alpha",
    "polynomial_potential",
    "inhomog_example",
    "as_discrete",
    "integrate",
    "entropy",
    "POTENTIALS",
    "from_name",
]


class QuadratureError(RuntimeError):
    """Non-finite integrand or error estimate above the requested tolerance."""


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights for ``int g(x) dx`` on ``[a, b]`` (or ``dgamma`` for Hermite)."""

    nodes: np.ndarray
    weights: np.ndarray
    a: float
    b: float
    level: int = 0
    kind: str = "legendre"
    panels: int = 0
    order: int = 0

    def refine(self) -> "QuadratureRule":
        if self.kind == "hermite":
            return gauss_hermite(2 * self.order, level=self.level + 1)
        return gauss_legendre(self.a, self.b, self.panels, self.order, self.level + 1)


_LEG_CACHE: dict = {}


def gauss_legendre(a, b, panels=64, order=16, level=0) -> QuadratureRule:
    """Composite Gauss–Legendre rule with ``panels * 2**level`` equal panels."""
    if order not in _LEG_CACHE:
        _LEG_CACHE[order] = legendre.leggauss(order)
    t, w = _LEG_CACHE[order]
    m = panels * 2**level
    edges = np.linspace(a, b, m + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return QuadratureRule(nodes, weights, float(a), float(b), level, "legendre", panels, order)


def gauss_hermite(n=160, level=0) -> QuadratureRule:
    """Probabilists' Gauss–Hermite rule normalised to integrate against ``gamma_1``."""
    x, w = hermite_e.hermegauss(n)
    w = w / w.sum()
    return QuadratureRule(x, w, -np.inf, np.inf, level, "hermite", 0, n)


@dataclass(frozen=True)
class DiscreteMeasure:
    """Atoms ``nodes`` with probability weights ``weights`` (summing to one)."""

    nodes: np.ndarray
    weights: np.ndarray
    rule: Optional[QuadratureRule] = None
    potential: Optional["Potential"] = None
    R: float = np.inf

    def integrate(self, values) -> float:
        v = np.asarray(values, dtype=float)
        if not np.all(np.isfinite(v)):
            raise QuadratureError("non-finite integrand sample")
        return float(np.dot(self.weights, v))

    def mean(self, values) -> float:
        return self.integrate(values)

    def refine(self) -> "DiscreteMeasure":
        if self.potential is None or self.rule is None:
            raise QuadratureError("cannot refine a measure without its potential and rule")
        return self.potential.discretize(self.rule.refine())


@dataclass(frozen=True)
class Potential:
    """Smooth potential ``V`` with ``mu = exp(-V) dx / Z``.

    Parameters
    ----------
    name : str
    V, grad : callable
        ``V`` and ``V'`` (vectorised).
    hess : callable, optional
        ``V''``.
    hessian_lb : float, optional
        Lower bound ``rho`` on ``V''``.
    R : float, optional
        Truncation radius. Default solves ``V(R) - min V >= 40`` on both sides.
    kind : str
        ``"gaussian"``, ``"u_alpha"``, ``"polynomial"``, ``"frozen"`` or ``"custom"``.
    """

    name: str
    V: Callable
    grad: Callable
    hess: Optional[Callable] = None
    hessian_lb: Optional[float] = None
    R: Optional[float] = None
    kind: str = "custom"
    params: dict = field(default_factory=dict, compare=False)
    panels: int = 64
    order: int = 16

    @cached_property
    def Vmin(self) -> float:
        x = np.linspace(-50, 50, 20001)
        return float(np.min(self.V(x)))

    @cached_property
    def radius(self) -> float:
        if self.R is not None:
            return float(self.R)
        out = 0.0
        for sgn in (1.0, -1.0):
            lo, hi = 0.0, 1.0
            while self.V(np.array(sgn * hi)) - self.Vmin < 40:
                lo, hi = hi, 2 * hi
                if hi > 1e6:
                    raise QuadratureError(f"{self.name}: potential does not confine")
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if self.V(np.array(sgn * mid)) - self.Vmin < 40:
                    lo = mid
                else:
                    hi = mid
            out = max(out, hi)
        return out

    def rule(self, level=0, R=None) -> QuadratureRule:
        r = self.radius if R is None else float(R)
        return gauss_legendre(-r, r, self.panels, self.order, level)

    def discretize(self, rule: Optional[QuadratureRule] = None, level=0, R=None) -> DiscreteMeasure:
        """Weights of ``mu`` on ``rule`` (default: composite Gauss–Legendre)."""
        if rule is None:
            rule = self.rule(level, R)
        if rule.kind == "hermite":
            if self.kind != "gaussian":
                raise QuadratureError("Gauss–Hermite rule only applies to the Gaussian")
            return DiscreteMeasure(rule.nodes, rule.weights, rule, self, np.inf)
        dens = np.exp(-(self.V(rule.nodes) - self.Vmin))
        w = rule.weights * dens
        return DiscreteMeasure(rule.nodes, w / w.sum(), rule, self, max(abs(rule.a), abs(rule.b)))

    @cached_property
    def logZ(self) -> float:
        """``log int exp(-V) dx`` at one refinement level above the default rule."""
        rule = self.rule(level=1)
        s = np.dot(rule.weights, np.exp(-(self.V(rule.nodes) - self.Vmin)))
        return float(np.log(s) - self.Vmin)

    @property
    def Z(self) -> float:
        return float(np.exp(self.logZ))

    def normalization_error(self, level=0) -> float:
        """Relative gap between the level's mass and the cached ``Z``."""
        rule = self.rule(level)
        s = np.dot(rule.weights, np.exp(-(self.V(rule.nodes) - self.Vmin)))
        return float(abs(np.log(s) - self.Vmin - self.logZ))

    def density(self, x):
        return np.exp(-self.V(np.asarray(x, dtype=float)) - self.logZ)

    def hessian_on_grid(self, x=None):
        if x is None:
            x = np.linspace(-self.radius, self.radius, 4097)
        if self.hess is not None:
            return self.hess(x)
        h = 1e-4
        return (self.V(x + h) - 2 * self.V(x) + self.V(x - h)) / h**2

    def with_radius(self, R) -> "Potential":
        return replace(self, R=float(R))


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------


def gaussian() -> Potential:
    """Standard Gaussian ``gamma_1``: ``V = x^2/2 + log sqrt(2 pi)``."""
    c = 0.5 * np.log(2 * np.pi)
    return Potential(
        name="gaussian",
        V=lambda x: 0.5 * np.asarray(x) ** 2 + c,
        grad=lambda x: np.asarray(x, dtype=float),
        hess=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        hessian_lb=1.0,
        kind="gaussian",
    )


def u_alpha_coefficients(alpha):
    """Quartic, quadratic and constant coefficients of ``u_alpha`` on ``|x| <= 1``."""
    a = float(alpha)
    return a * (a - 2) / 8, a * (4 - a) / 4, 1 - 0.75 * a + a * a / 8


def build_u_alpha(alpha: float) -> Potential:
    """Smoothed ``|x|^alpha``: the quartic on ``|x| <= 1`` glued C^2 to ``|x|^alpha``."""
    a = float(alpha)
    if not 1 < a < 2:
        raise ValueError("alpha must lie in (1, 2)")
    c4, c2, c0 = u_alpha_coefficients(a)

    def V(x):
        ax = np.abs(np.asarray(x, dtype=float))
        return np.where(ax > 1, ax**a, c4 * ax**4 + c2 * ax**2 + c0)

    def grad(x):
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        out = np.where(ax > 1, a * ax ** (a - 1), 4 * c4 * ax**3 + 2 * c2 * ax)
        return np.sign(x) * out

    def hess(x):
        ax = np.abs(np.asarray(x, dtype=float))
        with np.errstate(divide="ignore"):
            big = a * (a - 1) * np.maximum(ax, 1.0) ** (a - 2)
        return np.where(ax > 1, big, 12 * c4 * ax**2 + 2 * c2)

    return Potential(
        name=f"u_alpha:{a:g}",
        V=V,
        grad=grad,
        hess=hess,
        hessian_lb=0.0,
        kind="u_alpha",
        params={"alpha": a},
    )


def polynomial_potential(coeffs) -> Potential:
    """``V(x) = sum_k c_k x^k`` (ascending coefficients)."""
    c = np.asarray(coeffs, dtype=float)
    dc = P.polyder(c)
    d2c = P.polyder(c, 2)
    x = np.linspace(-50, 50, 20001)
    lb = float(np.min(P.polyval(x, d2c))) if d2c.size else 0.0
    return Potential(
        name="polynomial:" + ",".join(f"{v:g}" for v in c),
        V=lambda z: P.polyval(np.asarray(z, dtype=float), c),
        grad=lambda z: P.polyval(np.asarray(z, dtype=float), dc),
        hess=lambda z: P.polyval(np.asarray(z, dtype=float), d2c) + 0 * np.asarray(z, dtype=float),
        hessian_lb=lb,
        kind="polynomial",
        params={"coeffs": tuple(c)},
    )


# ---------------------------------------------------------------------------
# time-dependent potentials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PotentialFamily:
    """``t -> V_t`` with the time derivative and its spatial derivatives.

    All callables take ``(t, x)``. ``dV`` is the time derivative actually
    entering the constants (the unnormalised one for the built-in example);
    ``dV_normalized`` adds the time derivative of the normalising constant.
    """

    name: str
    V: Callable
    grad: Callable
    hess: Callable
    dV: Callable
    grad_dV: Callable
    lap_dV: Callable
    R: float = 12.0
    dV_normalized: Optional[Callable] = None
    hess_lb: Optional[Callable] = None
    params: dict = field(default_factory=dict, compare=False)

    def at(self, t: float) -> Potential:
        t = float(t)
        lb = self.hess_lb(t) if self.hess_lb is not None else None
        return Potential(
            name=f"{self.name}@{t:g}",
            V=lambda x: self.V(t, np.asarray(x, dtype=float)),
            grad=lambda x: self.grad(t, np.asarray(x, dtype=float)),
            hess=lambda x: self.hess(t, np.asarray(x, dtype=float)),
            hessian_lb=lb,
            R=self.R,
            kind="frozen",
            params={"t": t, **self.params},
        )

    def hessian_lb(self, t, x=None) -> float:
        if self.hess_lb is not None:
            return float(self.hess_lb(t))
        if x is None:
            x = np.linspace(-self.R, self.R, 8193)
        return float(np.min(self.hess(t, x)))


def inhomog_example(alpha=None, dalpha=None, beta=0.5, R=12.0, alpha_rate=0.1) -> PotentialFamily:
    """``V_t = x^2/2 + alpha(t) (1+x^2)^{beta/2}`` (normalised numerically).

    Parameters
    ----------
    alpha, dalpha : callable, optional
        ``alpha(t)`` and its derivative. Default ``alpha(t) = alpha_rate * t``.
    beta : float
        Exponent in ``(0, 1]``.
    """
    if alpha is None:
        r = float(alpha_rate)
        alpha = lambda t: r * t
        dalpha = lambda t: r
    elif dalpha is None:
        dalpha = lambda t: (alpha(t + 1e-6) - alpha(t)) / 1e-6
    b = float(beta)
    if not 0 < b <= 1:
        raise ValueError("beta must lie in (0, 1]")

    def vp(x):
        return (1 + x * x) ** (b / 2)

    def vp1(x):
        return b * x * (1 + x * x) ** (b / 2 - 1)

    def vp2(x):
        return b * (1 + x * x) ** (b / 2 - 2) * (1 + (b - 1) * x * x)

    # min of vp2 is attained at a finite point; evaluate on a wide grid once
    xs = np.linspace(0, 200, 400001)
    vp2_min = float(min(0.0, np.min(vp2(xs))))

    xmean = gauss_legendre(-R, R, 64, 16, 1)

    def mean_vp(t):
        x = xmean.nodes
        w = xmean.weights * np.exp(-(0.5 * x * x + alpha(t) * vp(x)))
        return float(np.dot(w, vp(x)) / w.sum())

    return PotentialFamily(
        name=f"inhomog:beta={b:g}",
        V=lambda t, x: 0.5 * x * x + alpha(t) * vp(x),
        grad=lambda t, x: x + alpha(t) * vp1(x),
        hess=lambda t, x: 1.0 + alpha(t) * vp2(x),
        dV=lambda t, x: dalpha(t) * vp(x),
        grad_dV=lambda t, x: dalpha(t) * vp1(x),
        lap_dV=lambda t, x: dalpha(t) * vp2(x),
        R=R,
        dV_normalized=lambda t, x: dalpha(t) * (vp(x) - mean_vp(t)),
        hess_lb=lambda t: 1.0 + alpha(t) * vp2_min,
        params={"beta": b, "alpha": alpha, "dalpha": dalpha},
    )


def constant_family(pot: Potential, R=None) -> PotentialFamily:
    """The time-independent family ``V_t = V``."""
    zero = lambda t, x: np.zeros_like(np.asarray(x, dtype=float))
    hess = pot.hess if pot.hess is not None else (lambda x: pot.hessian_on_grid(x))
    return PotentialFamily(
        name=f"constant:{pot.name}",
        V=lambda t, x: pot.V(x),
        grad=lambda t, x: pot.grad(x),
        hess=lambda t, x: hess(x),
        dV=zero,
        grad_dV=zero,
        lap_dV=zero,
        R=pot.radius if R is None else R,
        dV_normalized=zero,
        hess_lb=(lambda t: pot.hessian_lb) if pot.hessian_lb is not None else None,
    )


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------


MeasureLike = Union[Potential, DiscreteMeasure]


def as_discrete(mu: MeasureLike, rule: Optional[QuadratureRule] = None) -> DiscreteMeasure:
    if isinstance(mu, DiscreteMeasure):
        return mu
    return mu.discretize(rule)


def _values(g, dm: DiscreteMeasure):
    if callable(g):
        return np.asarray(g(dm.nodes), dtype=float) * np.ones_like(dm.nodes)
    return np.asarray(g, dtype=float)


def integrate(g, mu: MeasureLike, rule: Optional[QuadratureRule] = None, tol=None):
    """``(int g dmu, error estimate)``.

    The estimate is the change between ``rule`` and its dyadic refinement; the
    refined value is returned.
    """
    if not callable(g):
        raise TypeError("integrate needs a callable integrand")
    if isinstance(mu, DiscreteMeasure):
        coarse = mu
        fine = mu.refine()
    else:
        rule = mu.rule() if rule is None else rule
        coarse = mu.discretize(rule)
        fine = mu.discretize(rule.refine())
    v0 = coarse.integrate(_values(g, coarse))
    v1 = fine.integrate(_values(g, fine))
    err = abs(v1 - v0)
    if tol is not None and err > tol:
        raise QuadratureError(f"error estimate {err:.3e} above tolerance {tol:.3e}")
    return v1, err


def entropy(f2, mu: MeasureLike) -> float:
    """``Ent_mu(f2) = int f2 log f2 - (int f2) log int f2`` for ``f2 >= 0``."""
    dm = as_discrete(mu)
    g = _values(f2, dm)
    if np.any(g < 0):
        raise ValueError("entropy needs a non-negative function")
    m = dm.integrate(g)
    if m <= 0:
        raise ValueError("entropy of a function with zero mass")
    with np.errstate(divide="ignore", invalid="ignore"):
        glogg = np.where(g > 0, g * np.log(np.where(g > 0, g, 1.0)), 0.0)
    return dm.integrate(glogg) - m * np.log(m)


POTENTIALS = {
    "gaussian": lambda: gaussian(),
    "u_alpha": lambda a: build_u_alpha(float(a)),
    "polynomial": lambda *c: polynomial_potential([float(v) for v in c]),
}


def from_name(spec: str) -> Potential:
    """``"gaussian"``, ``"u_alpha:1.5"`` or ``"polynomial:c0,c1,..."``."""
    name, _, args = spec.strip().partition(":")
    if name not in POTENTIALS:
        raise KeyError(f"unknown measure {name!r}")
    params = [a for a in args.split(",") if a.strip()] if args else []
    return POTENTIALS[name](*params)
