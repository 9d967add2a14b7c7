"""Standard Orlicz families built from ``(F, Phi0, lambda)``, and the L_p scale.

The primitives of ``1/(u F(u))`` on ``(0, 1)`` and ``(1, inf)`` are tabulated in
the coordinate ``r = log|log u|``. On branch ``b`` (sign ``s_b = -1`` below one,
``+1`` above) the derivative of the primitive with respect to ``r`` is

    g_b(r) = 1 / Fr(s_b e^r),   Fr(l) := F(e^l) / l,

which tends to ``1/F'(1)`` as ``r -> -inf`` (``u -> 1``) and is identically one
for ``F = log``. In these coordinates

    Phi_t(x) = exp(s_b e^{r_t}),  r_t = G_b^{-1}(G_b(r_0) + lambda(t)),
    r_0 = log|log Phi0(x)|.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import legendre
from scipy.interpolate import PchipInterpolator

from . import _kernels
from .young import YoungFunction, power, validate_young

__all__ = [
    "FFunction",
    "LambdaFn",
    "FamilySpec",
    "SpecReport",
    "FamilySpecError",
    "StandardOrliczFamily",
    "LpFamily",
    "ComposedFamily",
    "FamilyReport",
    "log_F",
    "beta_log_F",
    "custom_F",
    "linear_lambda",
    "gross_lambda",
    "table_lambda",
    "validate_spec",
    "build_family",
    "family_eval",
    "SmoothnessReport",
    "smoothness_at_x0",
    "rebuild_distance",
    "anchor_independence",
    "shift_property",
    "validate_family",
    "gross_lp",
    "prop_move_constants",
]

LOG2 = np.log(2.0)


class FamilySpecError(ValueError):
    """The ``(F, Phi0, lambda)`` triple violates a hypothesis of the construction."""


# ---------------------------------------------------------------------------
# F and lambda
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FFunction:
    """Increasing ``F`` on ``(0, inf)`` with ``F(1) = 0``.

    ``of_log(l) = F(e^l)`` and ``uFp_of_log(l) = u F'(u)`` at ``u = e^l`` are
    the overflow-safe forms used by the tabulation.
    """

    name: str
    F: Callable
    dF: Callable
    d2F: Callable
    of_log: Callable
    uFp_of_log: Callable
    d3F_at1: Optional[float] = None
    params: dict = field(default_factory=dict, compare=False)

    @property
    def dF1(self) -> float:
        return float(self.dF(np.array(1.0)))

    @property
    def d2F1(self) -> float:
        return float(self.d2F(np.array(1.0)))

    @property
    def d3F1(self) -> float:
        if self.d3F_at1 is not None:
            return float(self.d3F_at1)
        h = 1e-4
        return float((self.d2F(np.array(1 + h)) - self.d2F(np.array(1 - h))) / (2 * h))

    def Fr(self, ell):
        """``F(e^l) / l``, continued by its series at ``l = 0``."""
        ell = np.asarray(ell, dtype=float)
        small = np.abs(ell) < 1e-6
        safe = np.where(small, 1.0, ell)
        direct = self.of_log(safe) / safe
        series = self.dF1 + (self.dF1 + self.d2F1) * ell / 2
        return np.where(small, series, direct)

    def kp_minus(self, ell):
        """``D(l) = (k'(e^l) - F'(1)) / l`` with ``k(u) = u F(u)``."""
        ell = np.asarray(ell, dtype=float)
        k2 = 2 * self.dF1 + self.d2F1
        k3 = 3 * self.d2F1 + self.d3F1
        small = np.abs(ell) < 1e-4
        safe = np.where(small, 1.0, ell)
        kp = self.of_log(safe) + self.uFp_of_log(safe)
        direct = (kp - self.dF1) / safe
        series = k2 + ell * (k2 + k3) / 2
        return np.where(small, series, direct)


def log_F() -> FFunction:
    return FFunction(
        name="log",
        F=lambda x: np.log(x),
        dF=lambda x: 1.0 / np.asarray(x, dtype=float),
        d2F=lambda x: -1.0 / np.asarray(x, dtype=float) ** 2,
        of_log=lambda ell: np.asarray(ell, dtype=float),
        uFp_of_log=lambda ell: np.ones_like(np.asarray(ell, dtype=float)),
        d3F_at1=2.0,
    )


def beta_log_F(beta: float) -> FFunction:
    """``F(x) = log(1+x)^beta - log(2)^beta``."""
    b = float(beta)
    if not 0 < b <= 1:
        raise FamilySpecError("beta must lie in (0, 1]")
    A = LOG2**b

    def F(x):
        x = np.asarray(x, dtype=float)
        # (log2 + d)^b - log2^b with d = log1p((x-1)/2), written without cancellation
        d = np.log1p((x - 1) / 2)
        return A * np.expm1(b * np.log1p(d / LOG2))

    @np.errstate(divide="ignore")
    def of_log(ell):
        ell = np.asarray(ell, dtype=float)
        big = ell > 700
        e = np.where(big, 0.0, ell)
        d = np.log1p(np.expm1(e) / 2)
        near = A * np.expm1(b * np.log1p(d / LOG2))
        far = np.logaddexp(0.0, ell) ** b - A
        return np.where(big, far, near)

    def uFp_of_log(ell):
        ell = np.asarray(ell, dtype=float)
        L = np.logaddexp(0.0, ell)
        sig = 0.5 * (1 + np.tanh(ell / 2))
        return b * L ** (b - 1) * sig

    def dF(x):
        x = np.asarray(x, dtype=float)
        return b * np.log1p(x) ** (b - 1) / (1 + x)

    def d2F(x):
        x = np.asarray(x, dtype=float)
        L = np.log1p(x)
        return b / (1 + x) ** 2 * ((b - 1) * L ** (b - 2) - L ** (b - 1))

    return FFunction(name=f"beta_log:{b:g}", F=F, dF=dF, d2F=d2F, of_log=of_log,
                     uFp_of_log=uFp_of_log, params={"beta": b})


def custom_F(F: Callable, name="custom") -> FFunction:
    """Wrap a plain ``F``; derivatives by central differences."""

    def dF(x):
        x = np.asarray(x, dtype=float)
        h = np.maximum(1e-6, 1e-6 * x)
        return (F(x + h) - F(x - h)) / (2 * h)

    def d2F(x):
        x = np.asarray(x, dtype=float)
        h = np.maximum(1e-4, 1e-4 * x)
        return (F(x + h) - 2 * F(x) + F(x - h)) / h**2

    return FFunction(
        name=name, F=F, dF=dF, d2F=d2F,
        of_log=lambda ell: F(np.exp(ell)),
        uFp_of_log=lambda ell: np.exp(ell) * dF(np.exp(ell)),
    )


@dataclass(frozen=True)
class LambdaFn:
    """Increasing ``lambda`` with ``lambda(0) = 0`` and its derivative."""

    name: str
    lam: Callable
    dlam: Optional[Callable] = None

    def __call__(self, t):
        return self.lam(t)

    def deriv(self, t):
        if self.dlam is not None:
            return self.dlam(t)
        return (self.lam(np.asarray(t) + 1e-6) - self.lam(t)) / 1e-6


def linear_lambda(alpha: float) -> LambdaFn:
    a = float(alpha)
    return LambdaFn(f"linear:{a:g}", lambda t: a * np.asarray(t, dtype=float),
                    lambda t: a + 0 * np.asarray(t, dtype=float))


def gross_lambda(rho: float) -> LambdaFn:
    """``lambda(t) = log((1 + e^{(4/rho) t}) / 2)``: gives ``q(t) = 1 + e^{(4/rho) t}`` from ``x^2``.

    ``rho`` is the log-Sobolev constant (2 for the standard Gaussian).
    """
    k = 4.0 / float(rho)

    def lam(t):
        t = np.asarray(t, dtype=float)
        return np.logaddexp(0.0, k * t) - LOG2

    def dlam(t):
        t = np.asarray(t, dtype=float)
        return k * 0.5 * (1 + np.tanh(k * t / 2))

    return LambdaFn(f"gross:{float(rho):g}", lam, dlam)


def table_lambda(ts, values) -> LambdaFn:
    """Monotone piecewise-cubic ``lambda`` through ``(ts, values)``."""
    ts = np.asarray(ts, dtype=float)
    values = np.asarray(values, dtype=float)
    if ts[0] != 0 or values[0] != 0 or np.any(np.diff(values) < 0):
        raise FamilySpecError("lambda table must start at (0, 0) and be non-decreasing")
    p = PchipInterpolator(ts, values, extrapolate=True)
    dp = p.derivative()
    return LambdaFn("table", lambda t: p(t), lambda t: dp(t))


# ---------------------------------------------------------------------------
# spec
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FamilySpec:
    F: FFunction
    Phi0: YoungFunction
    lam: LambdaFn


@dataclass
class SpecReport:
    xF_convex: bool
    nonintegrable_0: bool
    nonintegrable_1: bool
    nonintegrable_inf: bool
    monotone_hypothesis: bool
    x2_convexity: Optional[bool]
    phi0_nice: bool

    @property
    def ok(self) -> bool:
        base = (self.xF_convex and self.nonintegrable_0 and self.nonintegrable_1
                and self.nonintegrable_inf and self.monotone_hypothesis and self.phi0_nice)
        return bool(base)


def _g(F: FFunction, sign: float, r):
    return 1.0 / F.Fr(sign * np.exp(r))


def _increment(F, sign, a, b, n=64):
    t, w = legendre.leggauss(n)
    r = 0.5 * (a + b) + 0.5 * (b - a) * t
    return float(0.5 * (b - a) * np.dot(w, _g(F, sign, r)))


def _diverges(F, sign, r_end, direction):
    """Tail test: unit-interval increments of the primitive do not die out."""
    d = direction
    near = _increment(F, sign, r_end - d * 1.0, r_end) * d
    far = _increment(F, sign, r_end - d * 6.0, r_end - d * 5.0) * d
    return bool(near >= 0.05 * far and near > 0)


def validate_spec(spec: FamilySpec, grid=None, r_lo=-36.0, r_hi=6.57, tol=1e-9) -> SpecReport:
    """Check the hypotheses on ``(F, Phi0)`` on a test grid."""
    F = spec.F
    if grid is None:
        grid = np.logspace(-3, 3, 601)
    x = np.asarray(grid, dtype=float)
    xF = x * F.F(x)
    # second divided differences on the nonuniform grid
    d1 = np.diff(xF) / np.diff(x)
    d2 = np.diff(d1)
    xF_convex = bool(np.all(d2 >= -tol * (np.abs(d1[1:]) + 1)))
    non0 = _diverges(F, -1.0, r_hi, +1)
    non1 = _diverges(F, -1.0, r_lo, -1) and _diverges(F, +1.0, r_lo, -1)
    noninf = _diverges(F, +1.0, r_hi, +1)
    phi0 = spec.Phi0
    p, p1, p2 = phi0(x), phi0.deriv1(x), phi0.deriv2(x)
    ratio_deriv = 1 - p * p2 / p1**2
    h = -ratio_deriv * F.F(p) - p * F.dF(p)
    monotone = bool(np.all(np.diff(h) <= tol * (np.abs(h[1:]) + 1)))
    x2 = None
    if phi0.name == "lp:2":
        xF2 = x * F.F(x * x)
        e1 = np.diff(xF2) / np.diff(x)
        x2 = bool(np.all(np.diff(e1) >= -tol * (np.abs(e1[1:]) + 1)))
    nice = validate_young(phi0).nice
    return SpecReport(xF_convex, non0, non1, noninf, monotone, x2, nice)


# ---------------------------------------------------------------------------
# standard Orlicz family
# ---------------------------------------------------------------------------


class OrliczFamilyBase:
    """Interface shared by every t-indexed family of Young functions."""

    name = "family"

    def at(self, t) -> YoungFunction:  # pragma: no cover - interface
        raise NotImplementedError

    def dot(self, t, x):
        """``d/dt Phi_t(x)`` by central differences in t (one-sided at 0)."""
        h = 1e-4
        x = np.asarray(x, dtype=float)
        if t >= h:
            return (self.at(t + h)(x) - self.at(t - h)(x)) / (2 * h)
        return (-3 * self.at(t)(x) + 4 * self.at(t + h)(x) - self.at(t + 2 * h)(x)) / (2 * h)

    @property
    def x0(self) -> float:
        return self.at(0.0).x0


class _Table:
    """Primitive ``G`` of ``g`` on a uniform r-mesh with its inverse."""

    def __init__(self, F, sign, r_lo, r_hi, h, anchor_r, order=8):
        n = int(np.ceil((r_hi - r_lo) / h)) + 1
        self.r_lo = r_lo
        self.h = (r_hi - r_lo) / (n - 1)
        self.r = r_lo + self.h * np.arange(n)
        self.F = F
        self.sign = sign
        self.g = _g(F, sign, self.r)
        t, w = legendre.leggauss(order)
        mid = 0.5 * (self.r[1:] + self.r[:-1])
        nodes = mid[:, None] + 0.5 * self.h * t[None, :]
        cell = 0.5 * self.h * (_g(F, sign, nodes) @ w)
        G = np.concatenate([[0.0], np.cumsum(cell)])
        # anchor: G(anchor_r) = 0
        G = G - self.forward_raw(G, np.array([anchor_r]))[0]
        self.G = G
        if not np.all(np.diff(G) > 0):
            raise FamilySpecError("tabulated primitive is not strictly increasing")
        self.ginv = 1.0 / self.g

    def forward_raw(self, G, r):
        return _kernels.hermite_uniform(self.r_lo, self.h, G, self.g, r)

    def forward(self, r):
        return _kernels.hermite_uniform(self.r_lo, self.h, self.G, self.g, r)

    def inverse(self, y, polish=1):
        r = _kernels.hermite_nonuniform(self.G, self.r, self.ginv, y)
        for _ in range(polish):
            fin = np.isfinite(r) & (r < self.r[-1] + 50)
            rf = r[fin]
            # Newton step with the exact slope g = 1/Fr
            r[fin] = rf - (self.forward(rf) - y[fin]) * self.F.Fr(self.sign * np.exp(rf))
        return r


class StandardOrliczFamily(OrliczFamilyBase):
    """``Phi_t`` built from ``(F, Phi0, lambda)`` by shifting tabulated primitives.

    Parameters
    ----------
    spec : FamilySpec
    r_lo, r_hi, h : float
        Tabulation range and mesh in ``r = log|log u|``.
    anchors : tuple
        Points ``(u1, u2)`` in ``(0,1)`` and ``(1,inf)`` where the primitives vanish.
    """

    def __init__(self, spec: FamilySpec, r_lo=-36.0, r_hi=6.57, h=0.005, anchors=(0.5, np.e)):
        self.spec = spec
        self.F = spec.F
        self.Phi0 = spec.Phi0
        self.lam = spec.lam
        self.name = f"sof[{spec.F.name},{spec.Phi0.name},{spec.lam.name}]"
        self.anchors = anchors
        a1 = np.log(-np.log(anchors[0]))
        a2 = np.log(np.log(anchors[1]))
        self.tables = {
            -1.0: _Table(self.F, -1.0, r_lo, r_hi, h, a1),
            +1.0: _Table(self.F, +1.0, r_lo, r_hi, h, a2),
        }
        self._x0 = self.Phi0.x0
        self._cache: dict = {}

    @property
    def x0(self) -> float:
        return self._x0

    def reconstruction_residual(self) -> float:
        """``max |G(G^{-1}(y)) - y|`` over the tabulated range of both branches."""
        worst = 0.0
        for tab in self.tables.values():
            y = np.linspace(tab.G[0], tab.G[-1], 20001)
            worst = max(worst, float(np.max(np.abs(tab.forward(tab.inverse(y.copy())) - y))))
        return worst

    # -- core transport -----------------------------------------------------

    def _shift(self, ell0, lam):
        """``l_t`` and ``r_t - r_0`` for ``l_0 = log Phi0(x)`` at shift ``lam``."""
        ell0 = np.asarray(ell0, dtype=float)
        ell_t = np.zeros_like(ell0)
        dr = np.zeros_like(ell0)
        zero = ell0 == 0.0
        dr[zero] = lam * self.F.dF1
        for sign, tab in self.tables.items():
            m = (np.sign(ell0) == sign) & np.isfinite(ell0)
            if not np.any(m):
                continue
            r0 = np.log(np.abs(ell0[m]))
            if lam == 0.0:
                rt = r0
            else:
                rt = tab.inverse(tab.forward(r0) + lam)
            with np.errstate(over="ignore"):
                ell_t[m] = sign * np.exp(rt)
            dr[m] = rt - r0
        ell_t[np.isneginf(ell0)] = -np.inf
        ell_t[np.isposinf(ell0)] = np.inf
        return ell_t, dr

    def log_phi(self, t, x):
        """``log Phi_t(|x|)``."""
        lam = float(self.lam(t))
        ell0 = self.Phi0.log(np.abs(np.asarray(x, dtype=float)))
        return self._shift(ell0, lam)[0]

    def eval(self, t, x):
        with np.errstate(over="ignore"):
            return np.exp(self.log_phi(t, x))

    def _derivs(self, t, x):
        lam = float(self.lam(t))
        ax = np.abs(np.asarray(x, dtype=float))
        ell0 = self.Phi0.log(ax)
        ell_t, dr = self._shift(ell0, lam)
        Fr0 = self.F.Fr(ell0)
        Frt = self.F.Fr(ell_t)
        with np.errstate(over="ignore", invalid="ignore"):
            K = np.exp(ell_t - ell0 + dr) * Frt / Fr0
            p1 = self.Phi0.deriv1(ax)
            p2 = self.Phi0.deriv2(ax)
            p0 = self.Phi0(ax)
            E = (np.exp(dr) * self.F.kp_minus(ell_t) - self.F.kp_minus(ell0)) / Fr0
            d1 = p1 * K
            d2 = K * (p2 + p1 * (p1 / p0) * E)
        return d1, d2

    def deriv1(self, t, x):
        x = np.asarray(x, dtype=float)
        d1 = self._derivs(t, x)[0]
        return np.sign(x) * d1 if np.any(x < 0) else d1

    def deriv2(self, t, x):
        return self._derivs(t, x)[1]

    def dot(self, t, x):
        """``lambda'(t) Phi_t F(Phi_t)`` at ``x``."""
        ell_t = self.log_phi(t, x)
        with np.errstate(over="ignore", invalid="ignore"):
            out = float(self.lam.deriv(t)) * np.exp(ell_t) * ell_t * self.F.Fr(ell_t)
        return np.where(ell_t == 0, 0.0, out)

    def inverse(self, t, y):
        lam = float(self.lam(t))
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore"):
            ell = np.log(y)
        ell0, _ = self._shift_back(ell, lam)
        return self.Phi0.inverse(np.exp(ell0))

    def _shift_back(self, ell, lam):
        ell = np.asarray(ell, dtype=float)
        out = np.zeros_like(ell)
        for sign, tab in self.tables.items():
            m = (np.sign(ell) == sign) & np.isfinite(ell)
            if not np.any(m):
                continue
            r = np.log(np.abs(ell[m]))
            r0 = r if lam == 0.0 else tab.inverse(tab.forward(r) - lam)
            out[m] = sign * np.exp(r0)
        out[np.isneginf(ell)] = -np.inf
        out[np.isposinf(ell)] = np.inf
        return out, None

    def at(self, t) -> YoungFunction:
        t = float(t)
        if t not in self._cache:
            self._cache[t] = YoungFunction(
                name=f"{self.name}@{t:g}",
                fn=lambda x: self.eval(t, x),
                d1=lambda x: self._derivs(t, x)[0],
                d2=lambda x: self._derivs(t, x)[1],
                inv=lambda y: self.inverse(t, y),
                logfn=lambda x: self.log_phi(t, x),
                domain_hint=self.Phi0.domain_hint,
                params={"t": t},
            )
            if len(self._cache) > 512:
                self._cache.pop(next(iter(self._cache)))
        return self._cache[t]


def build_family(spec: FamilySpec, check=True, **kw) -> StandardOrliczFamily:
    """Tabulate the primitives and return the family.

    Raises
    ------
    FamilySpecError
        If ``check`` and a hypothesis fails, or the reconstruction residual
        exceeds ``1e-9``.
    """
    if check:
        rep = validate_spec(spec)
        if not rep.ok:
            raise FamilySpecError(f"spec invariant violated: {rep}")
    fam = StandardOrliczFamily(spec, **kw)
    res = fam.reconstruction_residual()
    if res >= 1e-9:
        raise FamilySpecError(f"primitive reconstruction residual {res:.2e}")
    fam.residual = res
    return fam


# ---------------------------------------------------------------------------
# L_p scale and composed families
# ---------------------------------------------------------------------------


class LpFamily(OrliczFamilyBase):
    """``Phi_t(x) = |x|^{q(t)}``."""

    def __init__(self, q: Callable, dq: Callable, name="lp_family"):
        self.q = q
        self.dq = dq
        self.name = name
        self._cache: dict = {}

    def at(self, t):
        t = float(t)
        if t not in self._cache:
            self._cache[t] = power(float(self.q(t)))
        return self._cache[t]

    def dot(self, t, x):
        ax = np.abs(np.asarray(x, dtype=float))
        q = float(self.q(t))
        with np.errstate(divide="ignore", invalid="ignore"):
            out = float(self.dq(t)) * ax**q * np.log(ax)
        return np.where(ax > 0, out, 0.0)

    def deriv1(self, t, x):
        return self.at(t).deriv1(x)

    def deriv2(self, t, x):
        return self.at(t).deriv2(x)

    def inverse(self, t, y):
        return self.at(t).inverse(y)

    def eval(self, t, x):
        return self.at(t)(x)

    @property
    def x0(self) -> float:
        return 1.0


def gross_lp(rho=2.0, q0=2.0) -> LpFamily:
    """``q(t) = 1 + (q0 - 1) e^{(4/rho) t}``; ``rho = 2`` is the Gaussian case."""
    k = 4.0 / float(rho)
    return LpFamily(lambda t: 1 + (q0 - 1) * np.exp(k * t),
                    lambda t: (q0 - 1) * k * np.exp(k * t), name=f"gross_lp:{rho:g}")


def prop_move_constants(q, dq, t, s):
    """``C(t,s) = q'(t) q(s) / (q(t) q'(s))`` and ``C~(t,s) = (q(t)-1) q(s) / (q(t)(q(s)-1))``."""
    qt, qs = q(t), q(s)
    return dq(t) * qs / (qt * dq(s)), (qt - 1) * qs / (qt * (qs - 1))


class ComposedFamily(OrliczFamilyBase):
    """``Phi_t = Psi_t o F`` for a fixed Young function ``F``."""

    def __init__(self, psi_family, inner: YoungFunction):
        self.psi = psi_family
        self.inner = inner
        self.name = f"{psi_family.name}o{inner.name}"
        self._cache: dict = {}

    def at(self, t):
        t = float(t)
        if t not in self._cache:
            psi = self.psi.at(t)
            inner = self.inner
            self._cache[t] = YoungFunction(
                name=f"{self.name}@{t:g}",
                fn=lambda x: psi(inner(x)),
                inv=lambda y: inner.inverse(psi.inverse(y)),
                domain_hint=inner.domain_hint,
            )
        return self._cache[t]


def family_eval(family, t, x, order):
    """``Phi_t`` (0), ``Phi_t'`` (1), ``Phi_t''`` (2), ``Phi_t^{-1}`` ("inv") or ``d/dt Phi_t`` ("dot")."""
    if t < 0:
        raise ValueError("t must be non-negative")
    if order == 0:
        return family.at(t)(x)
    if order == 1:
        return family.at(t).deriv1(x)
    if order == 2:
        return family.at(t).deriv2(x)
    if order == "inv":
        return family.at(t).inverse(x)
    if order == "dot":
        return family.dot(t, x)
    raise ValueError(f"unknown order {order!r}")


# ---------------------------------------------------------------------------
# validation of the family identities
# ---------------------------------------------------------------------------


@dataclass
class FamilyReport:
    iii_residual: float
    iv_violation: float
    convex: bool
    nice: bool
    anchor_ok: bool
    ordering_ok: bool
    reconstruction: float = 0.0
    details: dict = field(default_factory=dict)

    def passed(self, iii_tol=1e-5, iv_tol=1e-8) -> bool:
        return (self.iii_residual <= iii_tol and self.iv_violation <= iv_tol and self.convex
                and self.nice and self.anchor_ok and self.ordering_ok)


def _fd_dot(family, t, x, h=5e-4):
    """Fourth-order difference quotient of ``Phi_t(x)`` in ``t``."""
    f = lambda k: family.at(t + k * h)(x)
    if t >= 2 * h:
        return (-f(2) + 8 * f(1) - 8 * f(-1) + f(-2)) / (12 * h)
    return (-25 * f(0) + 48 * f(1) - 36 * f(2) + 16 * f(3) - 3 * f(4)) / (12 * h)


def _lam_prime(family, t):
    if hasattr(family, "lam"):
        return float(family.lam.deriv(t))
    # L_p family with F = log: lambda = log(q/q(0)), lambda' = q'/q
    return float(family.dq(t) / family.q(t))


def validate_family(family, t_grid, x_grid=None, y_grid=None, F: Optional[FFunction] = None) -> FamilyReport:
    """Check ``Phi_t^. o Phi_t^{-1}(y) = lambda'(t) y F(y)``, the monotonicity of
    ``(Phi_t''/Phi_t'^2) o Phi_t^{-1}`` in ``t``, convexity and niceness of each ``Phi_t``.

    The time derivative is taken by finite differences of ``Phi_t`` so the
    identity check does not reuse the closed form.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if x_grid is None:
        x_grid = np.logspace(-2, 2, 161)
    if y_grid is None:
        y_grid = np.concatenate([np.logspace(-6, -0.05, 60), np.logspace(0.05, 6, 60)])
    if F is None:
        F = family.F if hasattr(family, "F") else log_F()
    x0 = family.x0
    worst_iii = 0.0
    worst_iv = 0.0
    convex = True
    nice = True
    anchor = True
    ordering = True
    prevA = None
    prev_phi = None
    for t in t_grid:
        phi = family.at(t)
        xs = phi.inverse(y_grid)
        lhs = _fd_dot(family, t, xs)
        rhs = _lam_prime(family, t) * y_grid * F.F(y_grid)
        worst_iii = max(worst_iii, float(np.max(np.abs(lhs - rhs) / np.abs(rhs))))
        A = phi.deriv2(xs) / phi.deriv1(xs) ** 2
        if prevA is not None:
            worst_iv = max(worst_iv, float(np.max((prevA - A) / np.abs(prevA))))
        prevA = A
        d2 = phi.deriv2(x_grid)
        convex = convex and bool(np.all(d2 >= 0))
        nice = nice and validate_young(phi, np.logspace(-2, 2, 121)).nice
        anchor = anchor and abs(float(phi(np.array(x0))) - 1.0) < 1e-12
        vals = phi(x_grid)
        if prev_phi is not None:
            below = x_grid < x0
            ok_lo = np.all(vals[below] <= prev_phi[below] * (1 + 1e-12))
            ok_hi = np.all(vals[~below] >= prev_phi[~below] * (1 - 1e-12))
            ordering = ordering and bool(ok_lo and ok_hi)
        prev_phi = vals
    rec = float(getattr(family, "residual", 0.0))
    return FamilyReport(worst_iii, max(worst_iv, 0.0), convex, nice, anchor, ordering, rec)


@dataclass
class SmoothnessReport:
    """Relative jumps of ``Phi_t'`` and ``Phi_t''`` across ``x0`` (expected ``O(h)``)."""

    c1_jump: float
    c2_jump: float
    h: float

    def ok(self, tol=1e-3) -> bool:
        return bool(self.c1_jump <= tol and self.c2_jump <= tol)


def smoothness_at_x0(family, t_grid, h=1e-6) -> SmoothnessReport:
    """Compare one-sided values of ``Phi_t'`` and ``Phi_t''`` just left and right of ``x0``.

    For ``Phi_t'`` the closed form is also compared against a one-sided
    difference quotient of ``Phi_t`` on each side.
    """
    x0 = family.x0
    j1 = j2 = 0.0
    for t in np.asarray(t_grid, dtype=float):
        phi = family.at(t)
        xl, xr = np.array([x0 - h]), np.array([x0 + h])
        d1l, d1r = float(phi.deriv1(xl)[0]), float(phi.deriv1(xr)[0])
        d2l, d2r = float(phi.deriv2(xl)[0]), float(phi.deriv2(xr)[0])
        p0 = float(phi(np.array([x0]))[0])
        fdl = (p0 - float(phi(xl)[0])) / h
        fdr = (float(phi(xr)[0]) - p0) / h
        s1 = max(abs(d1l), abs(d1r))
        s2 = max(abs(d2l), abs(d2r), 1e-300)
        j1 = max(j1, abs(d1r - d1l) / s1, abs(fdl - d1l) / s1, abs(fdr - d1r) / s1)
        j2 = max(j2, abs(d2r - d2l) / s2)
    return SmoothnessReport(j1, j2, h)


def rebuild_distance(fam_a, fam_b, t_grid, x_grid=None) -> float:
    """Max relative gap between two families on a ``(t, x)`` grid."""
    if x_grid is None:
        x_grid = np.logspace(-2, 2, 161)
    worst = 0.0
    for t in np.asarray(t_grid, dtype=float):
        a, b = fam_a.at(t)(x_grid), fam_b.at(t)(x_grid)
        worst = max(worst, float(np.max(np.abs(a - b) / np.abs(b))))
    return worst


def anchor_independence(spec: FamilySpec, t_grid, anchors=(0.25, np.e**2), x_grid=None) -> float:
    """Rebuild with a second pair of anchors; the family should not change."""
    return rebuild_distance(build_family(spec, check=False), build_family(spec, check=False, anchors=anchors),
                            t_grid, x_grid)


def shift_property(spec: FamilySpec, s, t_grid, x_grid=None) -> float:
    """For linear ``lambda``: the family built from ``Phi_s`` against ``t -> Phi_{t+s}``."""
    if not spec.lam.name.startswith("linear:"):
        raise ValueError("the shift property needs a linear lambda")
    base = build_family(spec, check=False)

    class _Shifted:
        def at(self, t):
            return base.at(t + s)

    moved = build_family(FamilySpec(spec.F, base.at(s), spec.lam), check=False)
    return rebuild_distance(moved, _Shifted(), t_grid, x_grid)
