"""Young functions, their derivatives and inverses, and a named catalog.

A Young function is stored by its restriction to ``[0, inf)``; evaluation at
negative arguments goes through ``|x|``. Derivatives and the inverse use the
analytic formulas when a catalog entry provides them, otherwise central
differences and bracketed bisection.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import lambertw

__all__ = [
    "YoungFunction",
    "YoungReport",
    "DomainError",
    "Delta2Error",
    "young_eval",
    "delta2_constant",
    "validate_young",
    "fd_step",
    "bisect_inverse",
    "power",
    "linear",
    "exp_power",
    "exp_linear",
    "llogl",
    "nfunc",
    "ufunc",
    "power_exp_F",
    "H",
    "H_inv",
    "CATALOG",
    "from_name",
]

SQRT2 = np.sqrt(2.0)


class DomainError(ValueError):
    """Raised when a Young function is evaluated outside its domain."""


class Delta2Error(ArithmeticError):
    """Raised when the Delta_2 sandwich fails or Phi vanishes on the grid."""


def fd_step(x):
    """Central-difference step ``max(1e-5, 1e-5 |x|)``."""
    return np.maximum(1e-5, 1e-5 * np.abs(x))


def bisect_inverse(fn, y, hint=(0.0, 10.0), rtol=1e-12, max_doublings=2000):
    """Solve ``fn(x) = y`` for ``x >= 0`` with ``fn`` increasing on ``[0, inf)``.

    The bracket is grown geometrically from ``hint`` until it straddles every
    target, then bisected until ``hi - lo <= rtol * hi``.
    """
    y = np.asarray(y, dtype=float)
    shape = y.shape
    y = y.ravel()
    out = np.zeros_like(y)
    pos = y > 0
    if not np.any(pos):
        return out.reshape(shape)
    yy = y[pos]
    hi = np.full(yy.shape, max(float(hint[1]), 1e-300))
    for _ in range(max_doublings):
        bad = fn(hi) < yy
        if not np.any(bad):
            break
        hi[bad] *= 2.0
    else:
        raise DomainError("inverse bracket could not be grown")
    lo = hi / 2.0
    for _ in range(max_doublings):
        bad = fn(lo) > yy
        if not np.any(bad):
            break
        lo[bad] /= 2.0
        hi[bad] = lo[bad] * 2.0
    else:
        # targets below fn of the smallest representable bracket
        lo[bad] = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        up = fn(mid) < yy
        lo = np.where(up, mid, lo)
        hi = np.where(up, hi, mid)
        if np.all(hi - lo <= rtol * hi):
            break
    out[pos] = 0.5 * (lo + hi)
    return out.reshape(shape)


@dataclass(frozen=True)
class YoungFunction:
    """Even convex function with ``Phi(0) = 0``.

    Parameters
    ----------
    name : str
        Catalog label, e.g. ``"lp:4"``.
    fn : callable
        ``Phi`` on ``[0, inf)`` (vectorised).
    d1, d2, inv : callable, optional
        Analytic ``Phi'``, ``Phi''`` on ``(0, inf)`` and ``Phi^{-1}`` on ``[0, inf)``.
    logfn : callable, optional
        ``log Phi`` on ``(0, inf)``, used where ``Phi`` itself would over- or
        underflow.
    domain_hint : tuple
        Bracketing interval for root finds.
    breakpoints : tuple
        Points where the piecewise formula switches.
    delta2_K : float, optional
        Known Delta_2 constant.
    """

    name: str
    fn: Callable
    d1: Optional[Callable] = None
    d2: Optional[Callable] = None
    inv: Optional[Callable] = None
    logfn: Optional[Callable] = None
    domain_hint: tuple = (0.0, 10.0)
    breakpoints: tuple = ()
    delta2_K: Optional[float] = None
    params: dict = field(default_factory=dict, compare=False)

    def __call__(self, x):
        return self.fn(np.abs(np.asarray(x, dtype=float)))

    def deriv1(self, x):
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        if self.d1 is not None:
            v = self.d1(ax)
        else:
            h = fd_step(ax)
            v = (self.fn(ax + h) - self.fn(np.abs(ax - h))) / (2 * h)
        return np.sign(x) * v if np.any(x < 0) else v

    def deriv2(self, x):
        ax = np.abs(np.asarray(x, dtype=float))
        if self.d2 is not None:
            return self.d2(ax)
        h = fd_step(ax)
        return (self.fn(ax + h) - 2 * self.fn(ax) + self.fn(np.abs(ax - h))) / h**2

    def inverse(self, y):
        y = np.asarray(y, dtype=float)
        if np.any(y < 0):
            raise DomainError(f"{self.name}: inverse needs y >= 0")
        if self.inv is not None:
            return self.inv(y)
        return bisect_inverse(self.fn, y, self.domain_hint)

    def log(self, x):
        """``log Phi(|x|)``, finite where ``Phi`` overflows."""
        ax = np.abs(np.asarray(x, dtype=float))
        with np.errstate(divide="ignore"):
            if self.logfn is not None:
                return self.logfn(ax)
            return np.log(self.fn(ax))

    @property
    def x0(self) -> float:
        """The point with ``Phi(x0) = 1``."""
        return float(self.inverse(np.array(1.0)))


def young_eval(phi: YoungFunction, order, x):
    """Evaluate ``Phi`` (order 0), ``Phi'`` (1), ``Phi''`` (2) or ``Phi^{-1}`` ("inv")."""
    x = np.asarray(x, dtype=float)
    if order == "inv":
        if np.any(x < 0):
            raise DomainError("order=inv requires x >= 0")
        out = phi.inverse(x)
    elif order == 0:
        out = phi(x)
    elif order == 1:
        out = phi.deriv1(x)
    elif order == 2:
        out = phi.deriv2(x)
    else:
        raise ValueError(f"unknown order {order!r}")
    if not np.all(np.isfinite(out)):
        raise DomainError(f"{phi.name}: non-finite value at order {order}")
    return out


def delta2_constant(phi: YoungFunction, grid, rtol=1e-6) -> float:
    """Empirical Delta_2 constant ``max Phi(2x)/Phi(x)`` over ``grid``.

    The sandwich ``Phi(x) <= x Phi'(x) <= (K-1) Phi(x)`` is asserted on the
    grid with relative tolerance ``rtol``.
    """
    x = np.atleast_1d(np.asarray(grid, dtype=float))
    if x.size == 0:
        raise ValueError("grid must be nonempty")
    v = phi(x)
    if np.any(v <= 0):
        raise Delta2Error(f"{phi.name}: Phi vanishes on the grid")
    K = float(np.max(phi(2 * x) / v))
    xd = x * phi.deriv1(x)
    if np.any(xd < v * (1 - rtol)) or np.any(xd > (K - 1) * v * (1 + rtol)):
        raise Delta2Error(f"{phi.name}: Delta_2 sandwich fails with K={K}")
    return K


@dataclass
class YoungReport:
    name: str
    zero_at_origin: bool
    even: bool
    convex: bool
    inverse_ok: bool
    limit_zero: bool
    limit_inf: bool

    @property
    def nice(self) -> bool:
        return (self.zero_at_origin and self.even and self.convex
                and self.limit_zero and self.limit_inf)

    @property
    def young(self) -> bool:
        return self.zero_at_origin and self.even and self.convex


def validate_young(phi: YoungFunction, grid=None, tol=1e-9) -> YoungReport:
    """Check the Young-function axioms and N-function limits on ``grid``.

    Failures are reported, never raised. The limits ``Phi(x)/x -> 0`` at 0 and
    ``-> inf`` at infinity are judged on the ratio trend between the two
    smallest (largest) decades of the grid.
    """
    if grid is None:
        grid = np.logspace(-4, 2, 241)
    x = np.sort(np.asarray(grid, dtype=float))
    x = x[x > 0]
    with np.errstate(over="ignore", invalid="ignore"):
        v = phi(x)
        zero = float(phi(np.array(0.0))) == 0.0
        even = bool(np.allclose(phi(-x), v, rtol=1e-14, atol=0))
        xs = np.concatenate([-x[::-1], [0.0], x])
        vs = phi(xs)
        fin = np.isfinite(vs)
        xs, vs = xs[fin], vs[fin]
        # divided second differences on the (nonuniform) grid
        d1 = np.diff(vs) / np.diff(xs)
        scale = np.maximum(np.abs(d1[1:]), np.abs(d1[:-1])) + 1.0
        convex = bool(np.all(np.diff(d1) >= -tol * scale))
        fin = np.isfinite(v) & (v > 0)
        try:
            back = phi(phi.inverse(v[fin]))
            inverse_ok = bool(np.allclose(back, v[fin], rtol=1e-8, atol=0))
        except DomainError:
            inverse_ok = False
        lo = x[0]
        hi = x[-1]
        r = lambda z: float(phi(np.array(z))) / z
        limit_zero = r(lo) < 0.95 * r(10 * lo)
        rhi = r(hi)
        limit_inf = (not np.isfinite(rhi)) or rhi > 1.05 * r(hi / 10)
    return YoungReport(phi.name, zero, even, convex, inverse_ok, bool(limit_zero), bool(limit_inf))


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------


def power(p: float) -> YoungFunction:
    """``|x|^p``, ``p >= 1``."""
    p = float(p)
    if p < 1:
        raise DomainError("power Young function needs p >= 1")
    return YoungFunction(
            name=f"lp:{p:g}",
            fn=lambda x: x**p,
            d1=lambda x: p * x ** (p - 1),
            d2=lambda x: p * (p - 1) * x ** (p - 2) if p != 1 else np.zeros_like(x),
            inv=lambda y: y ** (1.0 / p),
            logfn=lambda x: p * np.log(x),
            domain_hint=(0.0, 2.0),
            delta2_K=2.0**p,
            params={"p": p},
        )


def linear() -> YoungFunction:
    phi = power(1.0)
    return YoungFunction(**{**phi.__dict__, "name": "linear"})


def exp_power(delta: float) -> YoungFunction:
    """``exp(|x|^delta) - 1`` (no Delta_2 condition)."""
    d = float(delta)
    if d < 1:
        raise DomainError("exp_power needs delta >= 1")

    def d1(x):
        return d * x ** (d - 1) * np.exp(x**d)

    def d2(x):
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.exp(x**d) * (d * (d - 1) * x ** (d - 2) + d * d * x ** (2 * d - 2))
        return out

    return YoungFunction(
        name=f"exp_power:{d:g}",
        fn=lambda x: np.expm1(x**d),
        d1=d1,
        d2=d2,
        inv=lambda y: np.log1p(y) ** (1.0 / d),
        logfn=lambda x: np.where(x**d > 30, x**d + np.log1p(-np.exp(-(x**d))), np.log(np.expm1(x**d))),
        domain_hint=(0.0, 2.0),
        params={"delta": d},
    )


def exp_linear() -> YoungFunction:
    """``exp(|x|) - |x| - 1``."""

    def fn(x):
        # expm1(x) - x loses digits for small x; use the series there
        small = x < 1e-3
        xs = np.where(small, x, 0.0)
        series = xs**2 / 2 + xs**3 / 6 + xs**4 / 24
        return np.where(small, series, np.expm1(x) - x)

    return YoungFunction(
        name="exp_linear",
        fn=fn,
        d1=lambda x: np.expm1(x),
        d2=lambda x: np.exp(x),
        domain_hint=(0.0, 2.0),
    )


def _llogl_fn(x):
    # the branch |x| >= 1 is written first, so it owns the breakpoint
    with np.errstate(divide="ignore", invalid="ignore"):
        big = 2 * x * np.log(x) + 1
    return np.where(x >= 1, big, x * x)


def _llogl_inv(y):
    y = np.asarray(y, dtype=float)
    # x log x = z with z = (y-1)/2 has x = exp(W(z)) = z / W(z)
    z = np.maximum(y - 1, 0) / 2
    wz = np.real(lambertw(z))
    big = np.where(z > 0, z / np.where(wz > 0, wz, 1.0), 1.0)
    return np.where(y >= 1, big, np.sqrt(np.maximum(y, 0)))


def llogl() -> YoungFunction:
    """The C^2 L log L function: ``2 x log x + 1`` for ``|x| >= 1``, ``x^2`` below."""
    with np.errstate(divide="ignore", invalid="ignore"):
        return YoungFunction(
            name="llogl",
            fn=_llogl_fn,
            d1=lambda x: np.where(x >= 1, 2 * np.log(np.maximum(x, 1e-300)) + 2, 2 * x),
            d2=lambda x: np.where(x >= 1, 2 / np.maximum(x, 1e-300), 2.0),
            inv=_llogl_inv,
            domain_hint=(0.0, 2.0),
            breakpoints=(1.0,),
        )


def nfunc() -> YoungFunction:
    """``N(x) = x^2 log(1 + x^2)``."""

    def d1(x):
        x2 = x * x
        return 2 * x * np.log1p(x2) + 2 * x**3 / (1 + x2)

    def d2(x):
        x2 = x * x
        return 2 * np.log1p(x2) + 4 * x2 / (1 + x2) + (6 * x2 + 2 * x2 * x2) / (1 + x2) ** 2

    return YoungFunction(
        name="nfunc",
        fn=lambda x: x * x * np.log1p(x * x),
        d1=d1,
        d2=d2,
        domain_hint=(0.0, 2.0),
    )


def H(x):
    """``H(x) = int_0^x sqrt(Phi'')`` for the L log L function (even)."""
    ax = np.abs(np.asarray(x, dtype=float))
    return np.where(ax <= 1, SQRT2 * ax, 2 * np.sqrt(2 * ax) - SQRT2)


def H_inv(y):
    """Inverse of ``H`` on ``[0, inf)``."""
    y = np.asarray(y, dtype=float)
    return np.where(y <= SQRT2, y / SQRT2, (y + SQRT2) ** 2 / 8)


def ufunc() -> YoungFunction:
    """``U(x) = Phi(H^{-1}(|x|))`` with ``Phi`` the L log L function."""

    def fn(x):
        w = (x + SQRT2) ** 2 / 8
        with np.errstate(divide="ignore", invalid="ignore"):
            big = 2 * w * np.log(w) + 1
        return np.where(x <= SQRT2, x * x / 2, big)

    def d1(x):
        w = (x + SQRT2) ** 2 / 8
        return np.where(x <= SQRT2, x, (2 * np.log(w) + 2) * (x + SQRT2) / 4)

    def d2(x):
        w = (x + SQRT2) ** 2 / 8
        return np.where(x <= SQRT2, 1.0, 1 + (np.log(w) + 1) / 2)

    return YoungFunction(
        name="ufunc",
        fn=fn,
        d1=d1,
        d2=d2,
        inv=lambda y: H(_llogl_inv(y)),
        domain_hint=(0.0, 2.0),
        breakpoints=(SQRT2,),
    )


def power_exp_F(p: float, q: float, F: Callable) -> YoungFunction:
    """``|x|^p exp(q F(|x|))`` for an increasing ``F``; derivatives by differences."""
    p, q = float(p), float(q)
    with np.errstate(divide="ignore"):
        return YoungFunction(
            name=f"power_exp_F:{p:g},{q:g}",
            fn=lambda x: np.where(x > 0, x**p * np.exp(q * F(np.maximum(x, 1e-300))), 0.0),
            domain_hint=(0.0, 2.0),
            params={"p": p, "q": q},
        )


def _beta_log(beta):
    b = float(beta)
    return lambda x: np.log1p(x) ** b - np.log(2.0) ** b


CATALOG = {
    "lp": lambda p: power(float(p)),
    "linear": linear,
    "exp_power": lambda d: exp_power(float(d)),
    "exp_linear": exp_linear,
    "llogl": llogl,
    "nfunc": nfunc,
    "ufunc": ufunc,
    "x2_exp_beta": lambda q, beta: power_exp_F(2.0, float(q), _beta_log(beta)),
}


def from_name(spec: str) -> YoungFunction:
    """Build a catalog entry from ``"name"`` or ``"name:a,b"``."""
    name, _, args = spec.strip().partition(":")
    if name not in CATALOG:
        raise KeyError(f"unknown Young function {name!r}")
    params = [a for a in args.split(",") if a.strip()] if args else []
    return CATALOG[name](*params)
