"""Both sides of the functional inequalities, and the Nash-to-ultracontractivity chain.

Every evaluator returns an :class:`IneqEval` (``slack = rhs - lhs``). Only the
unconditional inequalities are meant to be asserted by callers;
for the others the evaluators report ratios, since the constants involved are
only known to exist.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .luxnorm import luxembourg_norm
from .measure import DiscreteMeasure, Potential, as_discrete, gauss_hermite, gauss_legendre, gaussian
from .records import SlackRecord
from .semigroup import ou_apply
from .young import YoungFunction, delta2_constant, nfunc, power, ufunc

__all__ = [
    "IneqEval",
    "gaussian_measure",
    "eval_eq_f",
    "eval_fsobolev",
    "eval_ubound",
    "eval_hks",
    "theta_plus_from",
    "eval_covid",
    "rothaus_F",
    "eval_rothaus",
    "eval_poincare",
    "NashPipeline",
    "nash_alpha",
    "nash_ultra_pipeline",
    "technical_identity_homog",
    "technical_identity_inhomog",
    "eval_bg",
    "eval_fa",
    "pos",
    "neg",
    "log_plus",
]

IneqEval = SlackRecord


def pos(a):
    return np.maximum(a, 0.0)


def neg(a):
    return np.maximum(-np.asarray(a, dtype=float), 0.0)


def log_plus(a):
    a = np.asarray(a, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(a > 1, np.log(np.where(a > 0, a, 1.0)), 0.0)


def gaussian_measure(n=160) -> DiscreteMeasure:
    """``gamma_1`` on a Gauss–Hermite rule."""
    return gaussian().discretize(gauss_hermite(n))


def _split(f):
    """``(f, f')`` from a TestFunction, a pair, or a bare callable (differenced)."""
    if isinstance(f, tuple):
        return f
    if hasattr(f, "grad"):
        return f, f.grad
    h = 1e-6
    return f, (lambda x: (f(x + h) - f(x - h)) / (2 * h))


def _vals(g, x):
    return np.asarray(g(x), dtype=float) * np.ones_like(x)


# ---------------------------------------------------------------------------
# Orlicz-family inequalities
# ---------------------------------------------------------------------------


def eval_eq_f(family, t: float, f, mu=None) -> IneqEval:
    """``||f||^2 int Phi_t^.(f/||f||)`` against ``int Phi_t''(f/||f||) |f'|^2``."""
    dm = as_discrete(mu if mu is not None else gaussian_measure())
    fn, df = _split(f)
    v = _vals(fn, dm.nodes)
    phi = family.at(t)
    n = luxembourg_norm(v, phi, dm).lambda_star
    if n == 0:
        return IneqEval.le("eq_f", 0.0, 0.0, t=t, norm=0.0)
    g = v / n
    lhs = n * n * dm.integrate(family.dot(t, g))
    rhs = dm.integrate(phi.deriv2(g) * _vals(df, dm.nodes) ** 2)
    return IneqEval.le("eq_f", lhs, rhs, tol=1e-8, t=t, norm=n)


def eval_fsobolev(F: Callable, Phi0: YoungFunction, f, mu) -> IneqEval:
    """``||f||^2 int Phi0(g) F(Phi0(g))`` against ``int Phi0''(g) |f'|^2`` with ``g = f/||f||``.

    ``meta['ratio'] = lhs/rhs`` is the smallest constant ``c`` that works for ``f``.
    """
    dm = as_discrete(mu)
    fn, df = _split(f)
    Fc = F.F if hasattr(F, "F") else F
    v = _vals(fn, dm.nodes)
    n = luxembourg_norm(v, Phi0, dm).lambda_star
    if n == 0:
        return IneqEval.le("fsobolev", 0.0, 0.0, ratio=0.0)
    g = np.abs(v) / n
    p = Phi0(g)
    with np.errstate(divide="ignore", invalid="ignore"):
        pf = np.where(p > 0, p * Fc(np.where(p > 0, p, 1.0)), 0.0)
    lhs = n * n * dm.integrate(pf)
    rhs = dm.integrate(Phi0.deriv2(g) * _vals(df, dm.nodes) ** 2)
    ratio = lhs / rhs if rhs > 0 else (0.0 if abs(lhs) < 1e-14 else np.inf)
    return IneqEval.le("fsobolev", lhs, rhs, tol=1e-8, ratio=ratio, norm=n)


# ---------------------------------------------------------------------------
# U-bound
# ---------------------------------------------------------------------------


def _support_radius(logint: Callable, span=200.0, drop=60.0):
    x = np.linspace(-span, span, 80001)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        y = logint(x)
    y = np.where(np.isfinite(y), y, -np.inf)
    keep = y >= np.max(y) - drop
    return float(np.max(np.abs(x[keep]))) + 1.0


def eval_ubound(f, U: Potential, panels=512, order=16, tol=1e-8) -> IneqEval:
    """``int f^2 (U'^2 - 2 U'') e^{-U} dx <= 4 int f'^2 e^{-U} dx`` (unnormalised)."""
    fn, df = _split(f)
    Uxx = U.hess if U.hess is not None else (lambda x: U.hessian_on_grid(x))
    Umin = U.Vmin

    def logint(x):
        return 2 * np.log(np.abs(_vals(fn, x)) + np.abs(_vals(df, x)) + 1e-300) - (U.V(x) - Umin)

    R = _support_radius(logint)

    def sides(rule):
        x, w = rule.nodes, rule.weights
        e = np.exp(-(U.V(x) - Umin))
        fx, dfx = _vals(fn, x), _vals(df, x)
        lhs = np.dot(w, fx**2 * (U.grad(x) ** 2 - 2 * Uxx(x)) * e)
        rhs = 4 * np.dot(w, dfx**2 * e)
        return lhs, rhs

    rule = gauss_legendre(-R, R, panels, order)
    lhs, rhs = sides(rule)
    lhs2, rhs2 = sides(rule.refine())
    err = max(abs(lhs2 - lhs), abs(rhs2 - rhs))
    # scale out exp(-Umin) so the reported sides are the unnormalised integrals
    s = np.exp(-Umin)
    return IneqEval.le("ubound", lhs2 * s, rhs2 * s, tol=tol, R=R, quad_err=err * s, U=U.name)


# ---------------------------------------------------------------------------
# interpolation-type inequality and its consequences
# ---------------------------------------------------------------------------


def eval_hks(f, Phi: YoungFunction, Psi: YoungFunction, t_o: float, C: float, mu=None,
             K: Optional[float] = None) -> IneqEval:
    """``int f Phi'(f) log(f / Psi^{-1}(Phi(f)))`` against ``t_o int Phi''(f)|f'|^2 + (K-1) log C``.

    ``f`` is first rescaled to ``||f||_Phi = 1``.

    Raises
    ------
    ValueError
        If ``Phi`` has no finite Delta_2 constant.
    """
    dm = as_discrete(mu if mu is not None else gaussian_measure())
    if K is None:
        K = Phi.delta2_K if Phi.delta2_K is not None else delta2_constant(Phi, np.logspace(-3, 3, 601))
    if not np.isfinite(K):
        raise ValueError("the interpolation inequality needs a finite Delta_2 constant for Phi")
    fn, df = _split(f)
    v = np.abs(_vals(fn, dm.nodes))
    n = luxembourg_norm(v, Phi, dm).lambda_star
    g = v / n
    dg = _vals(df, dm.nodes) / n
    pos_ = g > 0
    back = Psi.inverse(Phi(g[pos_]))
    logr = np.zeros_like(g)
    logr[pos_] = np.log(g[pos_] / back)
    lhs = dm.integrate(g * Phi.deriv1(g) * logr)
    rhs = t_o * dm.integrate(Phi.deriv2(g) * dg**2) + (K - 1) * np.log(C)
    return IneqEval.le("hks", lhs, rhs, tol=1e-8, K=float(K), t_o=t_o, C=C, norm=n)


def theta_plus_from(Phi: YoungFunction, Psi: YoungFunction) -> Callable:
    """``x -> (log(Phi^{-1}(x) / Psi^{-1}(x)))_+``."""

    def th(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        m = x > 0
        out[m] = pos(np.log(Phi.inverse(x[m]) / Psi.inverse(x[m])))
        return out

    return th


def eval_covid(f, theta_plus: Callable, mu=None, c: Optional[float] = None, U: Optional[YoungFunction] = None) -> IneqEval:
    """``int f^2 log_+(f^2/||f||_U^2) theta_+(U(f/||f||_U))`` against ``c (int|f'|^2 + ||f||_U^2)``.

    With ``c`` omitted, ``meta['c_required']`` is the smallest constant for ``f``
    and the record is evaluated at that constant.
    """
    dm = as_discrete(mu if mu is not None else gaussian_measure())
    U = U if U is not None else ufunc()
    fn, df = _split(f)
    v = _vals(fn, dm.nodes)
    n = luxembourg_norm(v, U, dm).lambda_star
    g = np.abs(v) / n
    lhs = dm.integrate(v**2 * log_plus(g**2) * theta_plus(U(g)))
    base = dm.integrate(_vals(df, dm.nodes) ** 2) + n * n
    c_req = lhs / base if base > 0 else 0.0
    cc = c_req if c is None else c
    return IneqEval.le("covid", lhs, cc * base, tol=1e-8, c_required=c_req, normU=n)


def rothaus_F(x):
    """``(log x)^2`` for ``x >= 1``, ``(x - 1)^2`` on ``[0, 1]``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(x >= 1, np.log(np.where(x > 0, x, 1.0)) ** 2, (x - 1) ** 2)


def _ent(g, dm):
    m = dm.integrate(g)
    if m <= 0:
        return 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        gl = np.where(g > 0, g * np.log(np.where(g > 0, g, 1.0)), 0.0)
    return dm.integrate(gl) - m * np.log(m)


def eval_rothaus(f, mu=None, F: Optional[Callable] = None) -> IneqEval:
    """Rothaus' lemma.

    Classical (``F`` omitted): ``Ent(f^2) <= Ent(tf^2) + 2 int tf^2``, ``tf = f - int f``.
    F-mode: ``int f^2 F(f^2/mu(f^2)) <= b (int tf^2 F(tf^2/mu(tf^2)) + int tf^2)``; the
    empirical ``b`` is returned in ``meta['b']`` and the record is evaluated at ``b = 1``.
    """
    dm = as_discrete(mu if mu is not None else gaussian_measure())
    fn, _ = _split(f)
    v = _vals(fn, dm.nodes)
    tf = v - dm.integrate(v)
    m2 = dm.integrate(tf * tf)
    if F is None:
        lhs = _ent(v * v, dm)
        rhs = _ent(tf * tf, dm) + 2 * m2
        return IneqEval.le("rothaus", lhs, rhs, tol=1e-8, mode="classical")
    f2 = dm.integrate(v * v)
    lhs = dm.integrate(v * v * F(v * v / f2)) if f2 > 0 else 0.0
    A = dm.integrate(tf * tf * F(tf * tf / m2)) if m2 > 0 else 0.0
    base = A + m2
    b = lhs / base if base > 0 else (0.0 if abs(lhs) < 1e-14 else np.inf)
    return IneqEval.le("rothaus_F", lhs, base, tol=1e-8, mode="F", b=b)


def eval_poincare(f, mu=None) -> IneqEval:
    """``Var(f)`` against ``int |f'|^2``; ``meta['ratio']`` is the empirical constant."""
    dm = as_discrete(mu if mu is not None else gaussian_measure())
    fn, df = _split(f)
    v = _vals(fn, dm.nodes)
    var = dm.integrate((v - dm.integrate(v)) ** 2)
    energy = dm.integrate(_vals(df, dm.nodes) ** 2)
    ratio = var / energy if energy > 0 else (0.0 if var < 1e-14 else np.inf)
    return IneqEval.le("poincare", var, energy, tol=1e-8, ratio=ratio)


# ---------------------------------------------------------------------------
# Nash-type inequality to ultracontractivity
# ---------------------------------------------------------------------------


def nash_alpha(s):
    """``G(s) 1_{s >= e^2} + 4 1_{[1, e^2]}`` with ``G(s) = (log s)^2``."""
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(s >= np.e**2, np.log(np.maximum(s, 1.0)) ** 2, np.where(s >= 1, 4.0, 0.0))


@dataclass
class NashPipeline:
    """``theta``, ``n`` and ``m = n^{-1}`` tabulated on ``x_grid`` (``x > 1``)."""

    c: float
    x_grid: np.ndarray
    theta: np.ndarray
    n: np.ndarray
    tail_kappa: float
    divergent: bool

    def theta_at(self, x):
        return np.interp(np.log(x), np.log(self.x_grid), self.theta)

    def n_at(self, t):
        return np.exp(np.interp(np.log(t), np.log(self.x_grid), np.log(self.n)))

    def m(self, t):
        """``n^{-1}(t)``: monotone inversion of the tabulated ``n``, then the tail model
        ``n(x) = 1 / (kappa log x)`` below the last tabulated value."""
        t = np.asarray(t, dtype=float)
        if self.divergent:
            raise ValueError("n diverges: theta grows too slowly")
        if np.any(t > self.n[0]) or np.any(t <= 0):
            raise ValueError("t outside the range of n")
        ln = np.log(self.n[::-1])
        lx = np.log(self.x_grid[::-1])
        inner = np.exp(np.interp(np.log(t), ln, lx))
        with np.errstate(over="ignore"):
            tail = np.exp(1.0 / (self.tail_kappa * t))
        return np.where(t < self.n[-1], tail, inner)

    def lower_bound_check(self, x_o=np.e**2, x_min=2.0):
        """Best ``c'`` with ``theta >= c' x`` on ``[x_min, x_o]`` and ``c' x (log x)^2`` beyond."""
        x = self.x_grid
        m = x >= x_min
        ref = np.where(x[m] <= x_o, x[m], x[m] * np.log(x[m]) ** 2)
        return float(np.min(self.theta[m] / ref))


def _theta_one(alpha, x, c):
    if x <= 1:
        return 0.0
    s = np.geomspace(1.0, x, 513)
    vals = alpha(s) * (x - s)
    k = int(np.argmax(vals))
    lo, hi = s[max(k - 1, 0)], s[min(k + 1, s.size - 1)]
    best = vals[k]
    if hi > lo:
        res = minimize_scalar(lambda z: -float(alpha(np.array(z)) * (x - z)), bounds=(lo, hi),
                              method="bounded", options={"xatol": 1e-12 * hi})
        best = max(best, -res.fun)
    return float(best / (8 * c))


def nash_ultra_pipeline(alpha_fn: Callable = nash_alpha, c: float = 1.0, x_max=1e12, n_x=241) -> NashPipeline:
    """``theta(x) = sup_{s>=1} alpha(s)(x - s) / (8c)``, ``n(t) = int_t^inf dx/theta``.

    ``n`` uses Gauss–Legendre in ``log x`` up to ``x_max`` plus a tail fitted to
    ``theta ~ kappa x (log x)^2``. If the tail fit is not of that form (``theta``
    only linear), ``n`` is flagged divergent.
    """
    lx = np.linspace(np.log(1.0 + 1e-9), np.log(x_max), n_x)
    xg = np.exp(lx)
    th = np.array([_theta_one(alpha_fn, x, c) for x in xg])
    # growth exponent of theta/(x) in log x over the last decades decides the tail
    kappa = th[-1] / (xg[-1] * np.log(xg[-1]) ** 2)
    kappa_prev = th[-40] / (xg[-40] * np.log(xg[-40]) ** 2)
    divergent = not (abs(kappa / kappa_prev - 1) < 0.2)
    tail = 1.0 / (kappa * np.log(xg[-1])) if not divergent else np.inf
    # cumulative integral of 1/theta dx = x/theta d(log x), from the right
    node, wts = np.polynomial.legendre.leggauss(8)
    cells = np.zeros(xg.size - 1)
    for i in range(xg.size - 1):
        a, b = lx[i], lx[i + 1]
        y = 0.5 * (a + b) + 0.5 * (b - a) * node
        xs = np.exp(y)
        tv = np.array([_theta_one(alpha_fn, x, c) for x in xs])
        cells[i] = 0.5 * (b - a) * np.dot(wts, xs / tv)
    n = np.concatenate([np.cumsum(cells[::-1])[::-1], [0.0]]) + tail
    return NashPipeline(c, xg[1:], th[1:], n[1:], float(kappa), bool(divergent))


# ---------------------------------------------------------------------------
# the norm-derivative identity
# ---------------------------------------------------------------------------


def technical_identity_homog(family, f, t: float, n_gh=160, h=1e-4) -> IneqEval:
    """Homogeneous identity on ``gamma_1`` with the Mehler semigroup.

    ``lhs = N'(t) int g Phi_t'(g)`` with ``N'`` from central differences of
    ``t -> ||P_t f||_{Phi_t}``; ``rhs = N (int Phi_t^.(g) - int Phi_t''(g) |g'|^2)``.
    ``slack`` is minus the relative mismatch.
    """
    dm = gaussian_measure(n_gh)
    fn, _ = _split(f)
    x = dm.nodes

    def N(s):
        return luxembourg_norm(ou_apply(fn, s, n_gh)(x), family.at(s), dm, tol=1e-14).lambda_star

    Nt = N(t)
    dN = (N(t + h) - N(t - h)) / (2 * h) if t >= h else (-3 * Nt + 4 * N(t + h) - N(t + 2 * h)) / (2 * h)
    P = ou_apply(fn, t, n_gh)
    g = P(x) / Nt
    e = 1e-5
    dg = (P(x + e) - P(x - e)) / (2 * e) / Nt
    phi = family.at(t)
    lhs = dN * dm.integrate(g * phi.deriv1(g))
    a1 = dm.integrate(family.dot(t, g))
    a2 = dm.integrate(phi.deriv2(g) * dg**2)
    rhs = Nt * (a1 - a2)
    # relative to the size of the individual terms: both sides vanish when f saturates
    scale = max(abs(lhs), Nt * abs(a1), Nt * abs(a2), 1e-300)
    rel = abs(lhs - rhs) / scale
    return SlackRecord("technical_homog", lhs, rhs, -rel, 1e-4, {"t": t, "N": Nt, "dN": dN})


def technical_identity_inhomog(fam, f, t: float, q: Callable, dq: Callable, n_cells=4096,
                               n_steps=512, n_s=12, h=1e-3) -> IneqEval:
    """Inhomogeneous identity for ``Phi_t = |x|^{q(t)}`` with frozen-generator runs.

    ``lhs = N'(t) int g Phi_t'(g) dmu_t`` with ``N'`` from central differences of full
    frozen runs; ``rhs`` is the three-term right-hand side with its two Duhamel
    integrals in ``s`` done by Gauss–Legendre (``n_s`` nodes). ``dV`` is the
    normalised time derivative so that ``mu_t`` stays a probability measure.
    """
    from .semigroup import Propagator

    fn, _ = _split(f)
    prop = Propagator("grid_cn", fam.at(t), n_cells=n_cells, n_steps=n_steps, R=fam.R)
    x = prop.x
    dm = prop.measure()

    def N(s):
        p = Propagator("grid_cn", fam.at(s), n_cells=n_cells, n_steps=n_steps, R=fam.R)
        u = p.apply(fn, s).values
        return luxembourg_norm(u, power(float(q(s))), p.measure(), tol=1e-14).lambda_star

    Pt = prop.apply(fn, t).values
    Nt = luxembourg_norm(Pt, power(float(q(t))), dm, tol=1e-14).lambda_star
    dN = (N(t + h) - N(t - h)) / (2 * h)
    g = Pt / Nt
    qt = float(q(t))
    phi = power(qt)
    d1 = np.sign(g) * phi.deriv1(g)
    grad = lambda u: np.gradient(u, x, edge_order=2)
    dV = fam.dV_normalized if fam.dV_normalized is not None else fam.dV
    Vdot = dV(t, x)
    gVdot = fam.grad_dV(t, x)
    lap = fam.lap_dV(t, x)
    with np.errstate(divide="ignore", invalid="ignore"):
        ag = np.abs(g)
        dot = np.where(ag > 0, float(dq(t)) * ag**qt * np.log(np.where(ag > 0, ag, 1.0)), 0.0)
    term1 = Nt * (dm.integrate(dot) - dm.integrate(phi.deriv2(g) * grad(g) ** 2) - dm.integrate(phi(g) * Vdot))
    nodes, wts = np.polynomial.legendre.leggauss(n_s)
    ss = 0.5 * t * (nodes + 1)
    ws = 0.5 * t * wts
    duh1 = 0.0
    duh2 = 0.0
    cross = fam.grad(t, x) * gVdot - lap
    for s, w in zip(ss, ws):
        a = prop.apply(fn, t - s).values
        b = prop.apply(d1, s).values
        duh1 += w * dm.integrate(a * grad(b) * gVdot)
        duh2 += w * dm.integrate(cross * a * b)
    lhs = dN * dm.integrate(g * d1)
    rhs = term1 + duh1 - duh2
    scale = max(abs(lhs), abs(term1), abs(duh1), abs(duh2), 1e-300)
    rel = abs(lhs - rhs) / scale
    return SlackRecord("technical_inhomog", lhs, rhs, -rel, 1e-3,
                       {"t": t, "N": Nt, "dN": dN, "duhamel1": duh1, "duhamel2": duh2})


# ---------------------------------------------------------------------------
# norm comparisons
# ---------------------------------------------------------------------------


def eval_bg(h, mu=None) -> tuple:
    """``(1/sqrt2) ||h||_2 <= ||h||_U`` and ``||h||_U <= sqrt2 ||h||_N``."""
    dm = as_discrete(mu if mu is not None else gaussian_measure())
    fn, _ = _split(h)
    v = _vals(fn, dm.nodes)
    n2 = luxembourg_norm(v, power(2.0), dm).lambda_star
    nU = luxembourg_norm(v, ufunc(), dm).lambda_star
    nN = luxembourg_norm(v, nfunc(), dm).lambda_star
    tol = 1e-9 * max(nU, 1.0)
    return (IneqEval.le("bg_lower", n2 / np.sqrt(2), nU, tol=tol),
            IneqEval.le("bg_upper", nU, np.sqrt(2) * nN, tol=tol))


def eval_fa(a: float, mu: Optional[DiscreteMeasure] = None) -> IneqEval:
    """``||e^{a x/2}||_U <= 2 a e^{a^2/4}`` under ``gamma_1``."""
    dm = mu if mu is not None else gaussian_measure(200)
    v = np.exp(a * dm.nodes / 2)
    nU = luxembourg_norm(v, ufunc(), dm).lambda_star
    bound = 2 * a * np.exp(a * a / 4)
    return IneqEval.le("fa", nU, bound, tol=1e-9 * bound, a=a)
