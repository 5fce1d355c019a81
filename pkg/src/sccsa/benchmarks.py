"""The seven unimodal test functions (f1..f7) and a registry for user objectives.

========  ==========================================  ===============
id        function                                    range
========  ==========================================  ===============
f1        sphere, sum x_i^2                           [-100, 100]
f2        Schwefel 2.22, sum |x_i| + prod |x_i|       [-10, 10]
f3        Schwefel 1.2, sum_i (sum_{j<=i} x_j)^2      [-100, 100]
f4        Schwefel 2.21, max |x_i|                    [-100, 100]
f5        Rosenbrock                                  [-30, 30]
f6        step, sum floor(x_i + 0.5)^2                [-100, 100]
f7        quartic with noise, sum i x_i^4 + U[0, 1)   [-1.28, 1.28]
========  ==========================================  ===============

All minima are 0. f2 uses absolute values in both the sum and the product.
f6 reads the bracket as floor(x + 0.5). f7 adds exactly one uniform draw
per evaluation, taken from the caller's stream.
"""
from __future__ import annotations

from dataclasses import replace
from typing import Callable, Dict, Optional

import numpy as np

from . import _kernels as K
from .core import ArgumentError, Bounds, ConfigurationError, DimensionError, Problem, RngStream

DEFAULT_DIMENSION = 10

# id -> (kernel, lower, upper, stochastic)
_TABLE = {
    "f1": (K.sphere, -100.0, 100.0, False),
    "f2": (K.schwefel_2_22, -10.0, 10.0, False),
    "f3": (K.schwefel_1_2, -100.0, 100.0, False),
    "f4": (K.schwefel_2_21, -100.0, 100.0, False),
    "f5": (K.rosenbrock, -30.0, 30.0, False),
    "f6": (K.step, -100.0, 100.0, False),
    "f7": (K.quartic, -1.28, 1.28, True),
}

PAPER_FUNCTIONS = tuple(_TABLE)

_user: Dict[str, Callable[[int], Problem]] = {}


def get_benchmark(fid: str, dimension: int = DEFAULT_DIMENSION) -> Problem:
    """Look up a built-in or registered problem by id."""
    if dimension < 1:
        raise ConfigurationError(f"dimension must be >= 1, got {dimension}")
    if fid in _TABLE:
        kernel, lo, hi, noisy = _TABLE[fid]
        return Problem(fid, Bounds.box(lo, hi, dimension), kernel, known_min=0.0, stochastic=noisy)
    if fid in _user:
        return _user[fid](dimension)
    raise ConfigurationError(f"unknown function id {fid!r}; known: {', '.join(available())}")


BenchmarkSpec = Problem


def available():
    return list(_TABLE) + sorted(_user)


def register(fid: str, func: Callable[[np.ndarray], float], lower: float, upper: float,
             known_min: Optional[float] = None, stochastic: bool = False) -> None:
    """Register a user objective taking one position vector.

    Stochastic objectives get the same one-uniform-draw noise term as f7; the
    callable itself should be the noiseless part.
    """
    if fid in _TABLE:
        raise ConfigurationError(f"{fid!r} is a built-in function id")

    def batch(x, _f=func):
        return np.array([float(_f(row)) for row in x], dtype=np.float64)

    def make(dimension):
        return Problem(fid, Bounds.box(lower, upper, dimension), batch, known_min=known_min, stochastic=stochastic)

    _user[fid] = make


def unregister(fid: str) -> None:
    _user.pop(fid, None)


def evaluate_batch(spec: Problem, x: np.ndarray, noise: Optional[RngStream] = None) -> np.ndarray:
    """Evaluate every row of ``x``; one noise draw per row for stochastic specs."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != spec.dimension:
        raise DimensionError(f"expected points of dimension {spec.dimension}, got shape {x.shape}")
    if spec.stochastic and noise is None:
        raise ArgumentError(f"{spec.id} is stochastic and needs a noise stream")
    if not spec.stochastic and noise is not None:
        raise ArgumentError(f"{spec.id} is deterministic; no noise stream expected")
    if not (np.all(x >= spec.bounds.lower) and np.all(x <= spec.bounds.upper)):
        raise ArgumentError(f"point outside the bounds of {spec.id}; clamp before evaluating")
    values = spec.batch(np.ascontiguousarray(x))
    if spec.stochastic:
        values = values + noise.uniform(0.0, 1.0, x.shape[0])
    return values


def evaluate(spec: Problem, x, noise: Optional[RngStream] = None) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionError("evaluate takes a single position vector")
    return float(evaluate_batch(spec, x[None, :], noise)[0])


def noiseless_variant(spec: Problem) -> Problem:
    """Same formula without the additive noise term."""
    if not spec.stochastic:
        return spec
    return replace(spec, stochastic=False)


def optimum(fid: str, dimension: int = DEFAULT_DIMENSION) -> np.ndarray:
    """A known minimizer of a built-in function."""
    if fid not in _TABLE:
        raise ConfigurationError(f"no known minimizer for {fid!r}")
    if fid == "f5":
        return np.ones(dimension)
    return np.zeros(dimension)
