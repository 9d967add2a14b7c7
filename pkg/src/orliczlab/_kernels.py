"""Hot loops: theta-scheme tridiagonal time marching and cubic Hermite lookup.

Every kernel has a numba implementation and a numpy/LAPACK fallback with the
same signature. The numba path is used unless the environment variable
``ORLICZLAB_DISABLE_NUMBA`` is set to a non-empty value other than ``0``, or
numba cannot be imported.
"""

from __future__ import annotations

import os

import numpy as np
from scipy.linalg import lapack

DISABLE_ENV = "ORLICZLAB_DISABLE_NUMBA"

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False


def numba_enabled() -> bool:
    """Return True when the numba kernels are selected."""
    flag = os.environ.get(DISABLE_ENV, "")
    return HAVE_NUMBA and flag in ("", "0")


# ---------------------------------------------------------------------------
# theta-scheme march for du/dt = L u, L tridiagonal
# ---------------------------------------------------------------------------


def _theta_march_loop(sub, diag, sup, u0, h, nsteps, theta):
    n = u0.shape[0]
    u = u0.copy()
    rhs = np.empty(n)
    cp = np.empty(n)
    dp = np.empty(n)
    a = -theta * h
    e = (1.0 - theta) * h
    # forward sweep coefficients of (I - theta h L) do not change between steps
    m0 = 1.0 + a * diag[0]
    cp[0] = a * sup[0] / m0
    for i in range(1, n):
        m = 1.0 + a * diag[i] - a * sub[i] * cp[i - 1]
        cp[i] = a * sup[i] / m if i < n - 1 else 0.0
        dp[i] = m
    dp[0] = m0
    for _ in range(nsteps):
        if e != 0.0:
            rhs[0] = u[0] + e * (diag[0] * u[0] + sup[0] * u[1])
            for i in range(1, n - 1):
                rhs[i] = u[i] + e * (sub[i] * u[i - 1] + diag[i] * u[i] + sup[i] * u[i + 1])
            rhs[n - 1] = u[n - 1] + e * (sub[n - 1] * u[n - 2] + diag[n - 1] * u[n - 1])
        else:
            for i in range(n):
                rhs[i] = u[i]
        # Thomas solve with the cached factorisation
        u[0] = rhs[0] / dp[0]
        for i in range(1, n):
            u[i] = (rhs[i] - a * sub[i] * u[i - 1]) / dp[i]
        for i in range(n - 2, -1, -1):
            u[i] = u[i] - cp[i] * u[i + 1]
    return u


def _theta_march_numpy(sub, diag, sup, u0, h, nsteps, theta):
    u = np.array(u0, dtype=float, copy=True)
    a = -theta * h
    e = (1.0 - theta) * h
    dl = a * sub[1:]
    d = 1.0 + a * diag
    du = a * sup[:-1]
    dl_f, d_f, du_f, du2, ipiv, info = lapack.dgttrf(dl, d, du)
    if info != 0:
        raise np.linalg.LinAlgError(f"tridiagonal factorisation failed (info={info})")
    for _ in range(nsteps):
        if e != 0.0:
            lu = diag * u
            lu[1:] += sub[1:] * u[:-1]
            lu[:-1] += sup[:-1] * u[1:]
            rhs = u + e * lu
        else:
            rhs = u
        u, info = lapack.dgttrs(dl_f, d_f, du_f, du2, ipiv, rhs)
        if info != 0:
            raise np.linalg.LinAlgError(f"tridiagonal solve failed (info={info})")
    return u


# ---------------------------------------------------------------------------
# cubic Hermite evaluation with exact node slopes
# ---------------------------------------------------------------------------


def _hermite_uniform_loop(x0, h, y, dy, xq):
    n = y.shape[0]
    out = np.empty(xq.shape[0])
    for k in range(xq.shape[0]):
        s = (xq[k] - x0) / h
        if s <= 0.0:
            out[k] = y[0] + dy[0] * (xq[k] - x0)
            continue
        if s >= n - 1:
            out[k] = y[n - 1] + dy[n - 1] * (xq[k] - (x0 + (n - 1) * h))
            continue
        i = int(s)
        if i > n - 2:
            i = n - 2
        t = s - i
        t2 = t * t
        t3 = t2 * t
        out[k] = ((2 * t3 - 3 * t2 + 1) * y[i] + (t3 - 2 * t2 + t) * h * dy[i]
                  + (-2 * t3 + 3 * t2) * y[i + 1] + (t3 - t2) * h * dy[i + 1])
    return out


def _hermite_nonuniform_loop(xs, y, dy, xq):
    n = xs.shape[0]
    out = np.empty(xq.shape[0])
    idx = np.searchsorted(xs, xq)
    for k in range(xq.shape[0]):
        x = xq[k]
        if x <= xs[0]:
            out[k] = y[0] + dy[0] * (x - xs[0])
            continue
        if x >= xs[n - 1]:
            out[k] = y[n - 1] + dy[n - 1] * (x - xs[n - 1])
            continue
        i = idx[k] - 1
        h = xs[i + 1] - xs[i]
        t = (x - xs[i]) / h
        t2 = t * t
        t3 = t2 * t
        out[k] = ((2 * t3 - 3 * t2 + 1) * y[i] + (t3 - 2 * t2 + t) * h * dy[i]
                  + (-2 * t3 + 3 * t2) * y[i + 1] + (t3 - t2) * h * dy[i + 1])
    return out


def _hermite_basis(t, h, y0, y1, d0, d1):
    t2 = t * t
    t3 = t2 * t
    return ((2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0
            + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * d1)


def _hermite_uniform_numpy(x0, h, y, dy, xq):
    n = y.shape[0]
    s = (xq - x0) / h
    i = np.clip(np.floor(s).astype(np.int64), 0, n - 2)
    t = s - i
    out = _hermite_basis(t, h, y[i], y[i + 1], dy[i], dy[i + 1])
    lo = s <= 0.0
    hi = s >= n - 1
    out[lo] = y[0] + dy[0] * (xq[lo] - x0)
    out[hi] = y[-1] + dy[-1] * (xq[hi] - (x0 + (n - 1) * h))
    return out


def _hermite_nonuniform_numpy(xs, y, dy, xq):
    n = xs.shape[0]
    i = np.clip(np.searchsorted(xs, xq) - 1, 0, n - 2)
    h = xs[i + 1] - xs[i]
    t = (xq - xs[i]) / h
    out = _hermite_basis(t, h, y[i], y[i + 1], dy[i], dy[i + 1])
    lo = xq <= xs[0]
    hi = xq >= xs[-1]
    out[lo] = y[0] + dy[0] * (xq[lo] - xs[0])
    out[hi] = y[-1] + dy[-1] * (xq[hi] - xs[-1])
    return out


if HAVE_NUMBA:
    _theta_march_nb = numba.njit(cache=True)(_theta_march_loop)
    _hermite_uniform_nb = numba.njit(cache=True)(_hermite_uniform_loop)
    _hermite_nonuniform_nb = numba.njit(cache=True)(_hermite_nonuniform_loop)


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def theta_march(sub, diag, sup, u0, h, nsteps, theta=0.5, use_numba=None):
    """Advance ``u' = L u`` by ``nsteps`` theta-scheme steps of size ``h``.

    Parameters
    ----------
    sub, diag, sup : ndarray
        Tridiagonal coefficients of ``L``: ``(Lu)_i = sub[i] u[i-1] + diag[i] u[i]
        + sup[i] u[i+1]``. ``sub[0]`` and ``sup[-1]`` are ignored.
    u0 : ndarray
        Initial grid function.
    h : float
        Time step.
    nsteps : int
        Number of steps.
    theta : float
        0.5 is Crank–Nicolson, 1.0 is backward Euler.
    use_numba : bool, optional
        Override the environment selection.
    """
    if nsteps <= 0:
        return np.array(u0, dtype=float, copy=True)
    use = numba_enabled() if use_numba is None else (use_numba and HAVE_NUMBA)
    args = (_f64(sub), _f64(diag), _f64(sup), _f64(u0), float(h), int(nsteps), float(theta))
    if use:
        return _theta_march_nb(*args)
    return _theta_march_numpy(*args)


def hermite_uniform(x0, h, y, dy, xq, use_numba=None):
    """Cubic Hermite interpolant on the uniform mesh ``x0 + i h``.

    Outside the mesh the interpolant is continued linearly with the end slope.
    """
    xq = np.asarray(xq, dtype=np.float64)
    shape = xq.shape
    flat = _f64(xq.ravel())
    use = numba_enabled() if use_numba is None else (use_numba and HAVE_NUMBA)
    if use:
        out = _hermite_uniform_nb(float(x0), float(h), _f64(y), _f64(dy), flat)
    else:
        out = _hermite_uniform_numpy(float(x0), float(h), _f64(y), _f64(dy), flat)
    return out.reshape(shape)


def hermite_nonuniform(xs, y, dy, xq, use_numba=None):
    """Cubic Hermite interpolant on the strictly increasing mesh ``xs``."""
    xq = np.asarray(xq, dtype=np.float64)
    shape = xq.shape
    flat = _f64(xq.ravel())
    use = numba_enabled() if use_numba is None else (use_numba and HAVE_NUMBA)
    if use:
        out = _hermite_nonuniform_nb(_f64(xs), _f64(y), _f64(dy), flat)
    else:
        out = _hermite_nonuniform_numpy(_f64(xs), _f64(y), _f64(dy), flat)
    return out.reshape(shape)
