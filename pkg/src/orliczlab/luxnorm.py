"""Luxembourg norms by certified bisection, and the isometry between Orlicz spaces.

``||f||_Phi = inf{lam > 0 : int Phi(|f|/lam) dmu <= 1}``.

The modular ``lam -> int Phi(|f|/lam) dmu`` is non-increasing, so bisection on
the sign of ``modular - 1`` brackets the norm at every step.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .measure import DiscreteMeasure, MeasureLike, as_discrete
from .young import YoungFunction

__all__ = [
    "NormResult",
    "InfiniteNormError",
    "modular",
    "luxembourg_norm",
    "norm",
    "isometry_transport",
    "linfty_limit",
]


class InfiniteNormError(ArithmeticError):
    """No finite bracket: ``int Phi(|f|/lam) = inf`` for every tried ``lam``."""


@dataclass(frozen=True)
class NormResult:
    """Outcome of :func:`luxembourg_norm`.

    Attributes
    ----------
    lambda_star : float
        Norm value (upper end of the final bracket, so the modular is ``<= 1``).
    residual : float
        ``|modular(lambda_star) - 1|`` (zero for the zero function).
    bracket : tuple
        Final ``(lo, hi)``; ``modular(lo) > 1 >= modular(hi)``.
    iterations : int
    monotone : bool
        Modular values at the bracket endpoints are ordered as required.
    """

    lambda_star: float
    residual: float
    bracket: tuple
    iterations: int
    monotone: bool
    tol: float

    def __float__(self):
        return self.lambda_star


def modular(phi: YoungFunction, values, dm: DiscreteMeasure, lam: float) -> float:
    """``int Phi(|f| / lam) dmu`` for grid values of ``f``."""
    live = dm.weights > 0
    with np.errstate(over="ignore", invalid="ignore"):
        v = phi(np.abs(np.asarray(values)[live]) / lam)
    if not np.all(np.isfinite(v)):
        return np.inf
    return float(np.dot(dm.weights[live], v))


def _grid_values(f, dm):
    if callable(f):
        return np.asarray(f(dm.nodes), dtype=float) * np.ones_like(dm.nodes)
    v = np.asarray(f, dtype=float)
    if v.shape != dm.nodes.shape:
        raise ValueError("grid values do not match the measure nodes")
    return v


def luxembourg_norm(f, phi: YoungFunction, mu: MeasureLike, tol: float = 1e-10,
                    max_doublings: int = 200, max_iter: int = 400) -> NormResult:
    """Luxembourg norm of ``f`` (callable or values on ``mu``'s nodes).

    Raises
    ------
    InfiniteNormError
        If the modular stays above one after ``max_doublings`` doublings.
    """
    dm = as_discrete(mu)
    v = np.abs(_grid_values(f, dm))
    if not np.all(np.isfinite(v)):
        raise InfiniteNormError("f is not finite on the quadrature nodes")
    live = dm.weights > 0
    vmax = float(np.max(v[live])) if np.any(live) else 0.0
    if vmax == 0.0 or np.dot(dm.weights, v > 0) == 0.0:
        return NormResult(0.0, 0.0, (0.0, 0.0), 0, True, tol)
    # start at a scale where Phi(|f|/lam) is O(1); steps grow so wide ranges bracket quickly
    hi = vmax / max(phi.x0, 1e-300) if np.isfinite(phi.x0) else vmax
    n, step = 0, 2.0
    while modular(phi, v, dm, hi) > 1.0:
        hi *= step
        step = min(step * 2.0, 1e8)
        n += 1
        if n > max_doublings:
            raise InfiniteNormError(f"modular above one up to lambda={hi:.3e}")
    lo = hi
    n, step = 0, 2.0
    while modular(phi, v, dm, lo) <= 1.0:
        hi = lo
        lo /= step
        step = min(step * 2.0, 1e8)
        n += 1
        if n > max_doublings or lo == 0.0:
            # modular <= 1 at every scale tried: the norm is below lo
            return NormResult(lo, abs(modular(phi, v, dm, lo) - 1.0), (0.0, lo), n, True, tol)
    mlo = modular(phi, v, dm, lo)
    mhi = modular(phi, v, dm, hi)
    it = 0
    while it < max_iter:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        m = modular(phi, v, dm, mid)
        if m > 1.0:
            lo, mlo = mid, m
        else:
            hi, mhi = mid, m
        it += 1
        if abs(mhi - 1.0) < tol:
            break
    return NormResult(hi, abs(mhi - 1.0), (lo, hi), it, bool(mlo > 1.0 >= mhi), tol)


def norm(f, phi: YoungFunction, mu: MeasureLike, tol: float = 1e-10) -> float:
    """Convenience: the value of :func:`luxembourg_norm`."""
    return luxembourg_norm(f, phi, mu, tol).lambda_star


def isometry_transport(f, family, s: float, t: float, mu: MeasureLike, tol: float = 1e-10):
    """``I_{s,t} f = ||f||_{Phi_t} Phi_s^{-1}(Phi_t(f / ||f||_{Phi_t}))`` (sign-preserving).

    Returns grid values on the nodes of ``mu`` together with ``||f||_{Phi_t}``.
    """
    dm = as_discrete(mu)
    v = _grid_values(f, dm)
    phit = family.at(t)
    phis = family.at(s)
    nt = luxembourg_norm(v, phit, dm, tol).lambda_star
    if nt == 0.0:
        raise ValueError("isometry needs a nonzero function")
    if s == t:
        return v.copy(), nt
    g = np.abs(v) / nt
    out = nt * phis.inverse(phit(g)) * np.sign(v)
    return out, nt


def linfty_limit(f, family, t_grid: Sequence[float], mu: MeasureLike, tol: float = 1e-10,
                 sup_tol: float = 0.05):
    """Norms ``||f||_{Phi_t}`` along ``t_grid`` and the target ``||f||_inf / x0``.

    Returns ``(norms, target, ok)`` where ``ok`` means the sequence moves
    monotonically toward the target and ends within ``sup_tol`` (relative).
    """
    dm = as_discrete(mu)
    v = _grid_values(f, dm)
    if not np.all(np.isfinite(v)):
        raise ValueError("f must be bounded")
    x0 = family.x0
    target = float(np.max(np.abs(v))) / x0
    norms = np.array([luxembourg_norm(v, family.at(t), dm, tol).lambda_star for t in t_grid])
    dist = np.abs(norms - target)
    ok = bool(np.all(np.diff(dist) <= 1e-9 * target) and dist[-1] <= sup_tol * target)
    return norms, target, ok
