"""Diffusion semigroups ``P_t = exp(tL)``, ``L = d^2 - V' d``, on a line.

Two applicators are provided. ``mehler_ou`` evaluates the Ornstein–Uhlenbeck
semigroup exactly up to Gauss–Hermite quadrature. ``grid_cn`` discretises
``L`` in flux form on a uniform grid with no-flux ends,

    (L u)_i = (w_{i+1/2} (u_{i+1} - u_i) - w_{i-1/2} (u_i - u_{i-1})) / (m_i dx^2),

with ``w`` the density at cell faces and ``m`` the density at nodes (halved at
the two end nodes). The matrix is self-adjoint for the node weights ``m``, so
the discrete measure is exactly invariant and ``L 1 = 0``. Time stepping is
Crank–Nicolson after four backward-Euler half steps.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import hermite_e

from . import _kernels
from .measure import DiscreteMeasure, Potential, PotentialFamily, gaussian
from .records import SlackRecord

__all__ = [
    "GridFunction",
    "Propagator",
    "ou_apply",
    "diffusion_apply",
    "frozen_apply",
    "diagonal_apply",
    "gradient_bound_check",
    "worker_count",
    "parallel_map",
]

WORKERS_ENV = "ORLICZLAB_WORKERS"


def worker_count(default: int = 1) -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, default)))
    except ValueError:
        return default


def parallel_map(fn, items, workers: Optional[int] = None):
    """Order-preserving map, threaded when ``workers > 1``."""
    items = list(items)
    n = worker_count() if workers is None else workers
    if n <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------------------
# grid functions
# ---------------------------------------------------------------------------


@dataclass
class GridFunction:
    """Values on nodes ``x`` together with the probability weights of the grid measure."""

    x: np.ndarray
    values: np.ndarray
    weights: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __call__(self, xq):
        return np.interp(xq, self.x, self.values)

    def gradient(self) -> np.ndarray:
        """Centred differences (one-sided at the ends)."""
        return np.gradient(self.values, self.x, edge_order=2)

    def measure(self) -> DiscreteMeasure:
        if self.weights is None:
            raise ValueError("grid function carries no measure weights")
        return DiscreteMeasure(self.x, self.weights)

    def integrate(self, g=None) -> float:
        v = self.values if g is None else np.asarray(g, dtype=float)
        return float(np.dot(self.weights, v))

    def to_text(self, weights=False) -> str:
        """Two comma-separated columns ``x,value``; ``weights=True`` appends the measure weight."""
        lines = ["# orliczlab grid function v1", f"# n={self.x.size}"]
        if weights:
            w = self.weights if self.weights is not None else np.full(self.x.size, np.nan)
            lines += [f"{a!r},{b!r},{c!r}" for a, b, c in zip(self.x.tolist(), self.values.tolist(), w.tolist())]
        else:
            lines += [f"{a!r},{b!r}" for a, b in zip(self.x.tolist(), self.values.tolist())]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "GridFunction":
        rows = [ln.split(",") for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        arr = np.array([[float(v) for v in r] for r in rows], dtype=float)
        w = arr[:, 2].copy() if arr.shape[1] > 2 and not np.all(np.isnan(arr[:, 2])) else None
        return cls(arr[:, 0].copy(), arr[:, 1].copy(), w)


def _sample(f, x):
    if isinstance(f, GridFunction):
        if f.x.shape == x.shape and np.array_equal(f.x, x):
            return f.values.astype(float)
        return f(x)
    if callable(f):
        return np.asarray(f(x), dtype=float) * np.ones_like(x)
    v = np.asarray(f, dtype=float)
    if v.shape != x.shape:
        raise ValueError("grid values do not match the propagator grid")
    return v


# ---------------------------------------------------------------------------
# Mehler
# ---------------------------------------------------------------------------


def ou_apply(f: Callable, t: float, n: int = 160) -> Callable:
    """``x -> int f(e^{-t} x + sqrt(1 - e^{-2t}) y) gamma_1(dy)``.

    Raises
    ------
    FloatingPointError
        When the quadrature sum overflows (super-Gaussian ``f``).
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    y, w = hermite_e.hermegauss(n)
    w = w / w.sum()
    e = np.exp(-t)
    s = np.sqrt(-np.expm1(-2 * t))

    def Ptf(x):
        x = np.asarray(x, dtype=float)
        if t == 0:
            return np.asarray(f(x), dtype=float) * np.ones_like(x)
        arg = e * x[..., None] + s * y
        with np.errstate(over="raise"):
            vals = np.asarray(f(arg), dtype=float)
            out = vals @ w
        if not np.all(np.isfinite(out)):
            raise FloatingPointError("Mehler quadrature overflow")
        return out

    return Ptf


# ---------------------------------------------------------------------------
# propagator
# ---------------------------------------------------------------------------


class Propagator:
    """Semigroup applicator.

    Parameters
    ----------
    kind : {"mehler_ou", "grid_cn"}
    potential : Potential
        Ignored (Gaussian) for ``mehler_ou``.
    n_cells : int
        Number of grid cells on ``[-R, R]``.
    n_steps : int
        Time steps per application (``dt = t / n_steps``).
    R : float, optional
        Defaults to the potential's radius.
    """

    def __init__(self, kind="grid_cn", potential: Optional[Potential] = None, n_cells=4096,
                 n_steps=1024, R=None, n_hermite=160):
        if kind not in ("mehler_ou", "grid_cn"):
            raise ValueError(f"unknown propagator kind {kind!r}")
        self.kind = kind
        self.potential = potential if potential is not None else gaussian()
        self.n_steps = int(n_steps)
        self.n_hermite = int(n_hermite)
        self.R = float(self.potential.radius if R is None else R)
        self.n_cells = int(n_cells)
        self.x = np.linspace(-self.R, self.R, self.n_cells + 1)
        self.dx = 2 * self.R / self.n_cells
        if kind == "grid_cn":
            self._assemble()
        else:
            dens = np.exp(-0.5 * self.x**2)
            dens[[0, -1]] *= 0.5
            self.weights = dens / dens.sum()

    # -- discretisation ----------------------------------------------------

    def _assemble(self):
        V = self.potential.V
        x = self.x
        vmin = float(np.min(V(x)))
        m = np.exp(-(V(x) - vmin))
        mid = 0.5 * (x[1:] + x[:-1])
        w = np.exp(-(V(mid) - vmin))
        m_cell = m.copy()
        m_cell[[0, -1]] *= 0.5
        h2 = self.dx * self.dx
        sub = np.zeros_like(x)
        sup = np.zeros_like(x)
        sub[1:] = w / (m_cell[1:] * h2)
        sup[:-1] = w / (m_cell[:-1] * h2)
        self.sub, self.sup = sub, sup
        self.diag = -(sub + sup)
        self.weights = m_cell / m_cell.sum()

    def generator(self, u) -> np.ndarray:
        """``L u`` on the grid."""
        u = np.asarray(u, dtype=float)
        out = self.diag * u
        out[1:] += self.sub[1:] * u[:-1]
        out[:-1] += self.sup[:-1] * u[1:]
        return out

    def measure(self) -> DiscreteMeasure:
        return DiscreteMeasure(self.x, self.weights, potential=self.potential, R=self.R)

    # -- time stepping -----------------------------------------------------

    def _march(self, u, t, n_steps=None):
        n = self.n_steps if n_steps is None else int(n_steps)
        if t == 0:
            return np.array(u, dtype=float, copy=True)
        dt = t / n
        # Rannacher start: four backward-Euler half steps replace two CN steps
        u = _kernels.theta_march(self.sub, self.diag, self.sup, u, dt / 2, 4, theta=1.0)
        return _kernels.theta_march(self.sub, self.diag, self.sup, u, dt, n - 2, theta=0.5)

    def apply(self, f, t: float, x=None, n_steps=None) -> GridFunction:
        """``P_t f`` on the grid (or at ``x`` for the Mehler kind)."""
        if t < 0:
            raise ValueError("t must be non-negative")
        if self.kind == "mehler_ou":
            xs = self.x if x is None else np.asarray(x, dtype=float)
            g = f if callable(f) and not isinstance(f, GridFunction) else (lambda z: _sample(f, z))
            vals = ou_apply(g, t, self.n_hermite)(xs)
            w = self.weights if x is None else None
            return GridFunction(xs, vals, w, {"t": t, "kind": self.kind})
        u0 = _sample(f, self.x)
        if not np.all(np.isfinite(u0)):
            raise FloatingPointError("initial data not finite on the grid")
        u = self._march(u0, t, n_steps)
        return GridFunction(self.x, u, self.weights, {"t": t, "kind": self.kind})

    def evolve(self, f, times: Sequence[float]) -> list:
        """Snapshots at increasing ``times``, each continuing from the previous one."""
        times = [float(s) for s in times]
        if any(b < a for a, b in zip(times, times[1:])) or (times and times[0] < 0):
            raise ValueError("times must be non-negative and non-decreasing")
        out = []
        prev_t = 0.0
        if self.kind == "mehler_ou":
            return [self.apply(f, s) for s in times]
        u = _sample(f, self.x)
        for s in times:
            dt = s - prev_t
            if dt > 0:
                u = self._march(u, dt)
            out.append(GridFunction(self.x, u.copy(), self.weights, {"t": s, "kind": self.kind}))
            prev_t = s
        return out

    def refinement_error(self, f, t: float) -> float:
        """Sup-distance between ``n_steps`` and ``2 n_steps`` runs (time-step check)."""
        a = self.apply(f, t).values
        b = self.apply(f, t, n_steps=2 * self.n_steps).values
        return float(np.max(np.abs(a - b)))


def diffusion_apply(f, t: float, pot: Potential, **kw) -> GridFunction:
    """Crank–Nicolson ``P_t f`` for ``L = d^2 - V' d`` with no-flux ends."""
    return Propagator("grid_cn", pot, **kw).apply(f, t)


def frozen_apply(f, s: float, t_freeze: float, fam: PotentialFamily, **kw) -> GridFunction:
    """``P_s^{(t)} f``: the semigroup of ``L_t`` with ``t = t_freeze`` run for time ``s``."""
    return Propagator("grid_cn", fam.at(t_freeze), R=fam.R, **kw).apply(f, s)


def diagonal_apply(f, ts: Sequence[float], fam: PotentialFamily, workers=None, **kw) -> list:
    """``[P_t^{(t)} f for t in ts]`` by independent frozen runs."""
    return parallel_map(lambda t: frozen_apply(f, t, t, fam, **kw), ts, workers)


# ---------------------------------------------------------------------------
# gradient commutation
# ---------------------------------------------------------------------------


def _neg(v):
    return np.maximum(-v, 0.0)


def gradient_bound_check(f: Callable, W: Optional[Callable], pot: Potential, t: float,
                         df: Optional[Callable] = None, propagator: Optional[Propagator] = None,
                         xs=None, tol=1e-8, fd_step=1e-5) -> SlackRecord:
    """Min over ``xs`` of ``e^{(c - rho) t} P_t(|f'| + W f) - (|(P_t f)'| + W P_t f)``.

    ``c = max(2 sup|W'|, sup_{W != 0} (L W / W - rho)_-)`` is evaluated on the
    potential's grid. Gradients of ``P_t f`` are centred differences.
    """
    rho = pot.hessian_lb
    if rho is None:
        rho = float(np.min(pot.hessian_on_grid()))
    if propagator is None:
        kind = "mehler_ou" if pot.kind == "gaussian" else "grid_cn"
        propagator = Propagator(kind, pot)
    R = propagator.R
    grid = np.linspace(-R, R, 8193)
    if W is None:
        W = lambda x: np.zeros_like(np.asarray(x, dtype=float))
    h = 1e-4
    Wg = W(grid)
    dW = (W(grid + h) - W(grid - h)) / (2 * h)
    d2W = (W(grid + h) - 2 * Wg + W(grid - h)) / h**2
    LW = d2W - pot.grad(grid) * dW
    nz = Wg > 0
    term2 = float(np.max(_neg(LW[nz] / Wg[nz] - rho))) if np.any(nz) else 0.0
    c = max(2 * float(np.max(np.abs(dW))), term2)
    if not np.isfinite(c):
        return SlackRecord("gradient_bound", np.nan, np.nan, -np.inf, tol, {"c": c, "reason": "c infinite"})
    if df is None:
        df = lambda x: (f(x + fd_step) - f(x - fd_step)) / (2 * fd_step)
    src = lambda x: np.abs(df(x)) + W(x) * f(x)
    if xs is None:
        xs = np.linspace(-R / 2, R / 2, 401)
    xs = np.asarray(xs, dtype=float)
    if propagator.kind == "mehler_ou":
        n = propagator.n_hermite
        Pf = ou_apply(f, t, n)
        Psrc = ou_apply(src, t, n)
        grad = (Pf(xs + fd_step) - Pf(xs - fd_step)) / (2 * fd_step)
        lhs = np.abs(grad) + W(xs) * Pf(xs)
        rhs = np.exp((c - rho) * t) * Psrc(xs)
    else:
        Pf = propagator.apply(f, t)
        Psrc = propagator.apply(src, t)
        grad = np.interp(xs, Pf.x, Pf.gradient())
        lhs = np.abs(grad) + W(xs) * Pf(xs)
        rhs = np.exp((c - rho) * t) * Psrc(xs)
    slack = rhs - lhs
    i = int(np.argmin(slack))
    return SlackRecord("gradient_bound", float(lhs[i]), float(rhs[i]), float(slack[i]), tol,
                       {"c": c, "rho": float(rho), "t": float(t), "x_argmin": float(xs[i]),
                        "kind": propagator.kind})
