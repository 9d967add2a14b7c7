"""Bundled smooth test functions with analytic first derivatives."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = ["TestFunction", "f_a", "BUNDLED", "bundled", "nonnegative", "by_name"]


@dataclass(frozen=True)
class TestFunction:
    __test__ = False  # keep pytest from collecting this class

    name: str
    f: Callable
    df: Callable
    nonneg: bool

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.asarray(self.f(x), dtype=float) * np.ones_like(x)

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        return np.asarray(self.df(x), dtype=float) * np.ones_like(x)


def f_a(a: float) -> TestFunction:
    """``x -> e^{a x / 2}``."""
    a = float(a)
    return TestFunction(f"exp_a{a:g}", lambda x: np.exp(a * x / 2), lambda x: a / 2 * np.exp(a * x / 2), True)


def _const(c):
    return TestFunction(f"const{c:g}", lambda x: c + 0 * x, lambda x: 0 * x, c >= 0)


def _bump(x):
    return 0.5 * (np.tanh(x + 1) - np.tanh(x - 1))


def _dbump(x):
    return 0.5 * (1 / np.cosh(x + 1) ** 2 - 1 / np.cosh(x - 1) ** 2)


BUNDLED = (
    _const(1.0),
    _const(3.0),
    f_a(0.5),
    f_a(1.0),
    f_a(2.0),
    TestFunction("x", lambda x: x, lambda x: 1 + 0 * x, False),
    TestFunction("he2", lambda x: x * x - 1, lambda x: 2 * x, False),
    TestFunction("he3", lambda x: x**3 - 3 * x, lambda x: 3 * x * x - 3, False),
    TestFunction("one_plus_x2", lambda x: 1 + x * x, lambda x: 2 * x, True),
    TestFunction("tanh_bump", _bump, _dbump, True),
    TestFunction("lorentz", lambda x: 1 / (1 + x * x), lambda x: -2 * x / (1 + x * x) ** 2, True),
    TestFunction("two_plus_sin", lambda x: 2 + np.sin(2 * x), lambda x: 2 * np.cos(2 * x), True),
)


def bundled() -> list:
    return list(BUNDLED)


def nonnegative() -> list:
    return [f for f in BUNDLED if f.nonneg]


def by_name(name: str) -> TestFunction:
    for f in BUNDLED:
        if f.name == name:
            return f
    if name.startswith("exp_a"):
        return f_a(float(name[5:]))
    raise KeyError(f"unknown test function {name!r}")
