"""Shared types, bound handling and the random-number contract.

Every stochastic component draws from an :class:`RngStream`, a thin wrapper
around numpy's Philox-4x64 counter-based generator. Philox output depends only
on the 64-bit key, so a given seed produces the same draw sequence on every
platform and numpy build.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np


class ConfigurationError(ValueError):
    """Invalid run / experiment configuration."""


class ArgumentError(ValueError):
    """Invalid argument to a single operation."""


class DimensionError(ValueError):
    """Vector length does not match the problem dimension."""


@dataclass(frozen=True)
class Bounds:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.array(self.lower, dtype=np.float64).reshape(-1)
        hi = np.array(self.upper, dtype=np.float64).reshape(-1)
        if lo.shape != hi.shape:
            raise DimensionError(f"lower has {lo.size} entries, upper has {hi.size}")
        if lo.size < 1:
            raise ConfigurationError("bounds need at least one dimension")
        if not np.all(lo < hi):
            raise ConfigurationError("every lower bound must be strictly below its upper bound")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def box(cls, lo: float, hi: float, dimension: int) -> "Bounds":
        if dimension < 1:
            raise ConfigurationError(f"dimension must be >= 1, got {dimension}")
        return cls(np.full(dimension, lo, dtype=np.float64), np.full(dimension, hi, dtype=np.float64))

    @property
    def dimension(self) -> int:
        return self.lower.size

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=np.float64)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def __eq__(self, other):
        if not isinstance(other, Bounds):
            return NotImplemented
        return np.array_equal(self.lower, other.lower) and np.array_equal(self.upper, other.upper)

    def __hash__(self):
        return hash((self.lower.tobytes(), self.upper.tobytes()))


@dataclass(frozen=True)
class Problem:
    """An objective with box bounds.

    ``batch`` maps an ``(n, d)`` array of points to ``n`` noiseless values.
    For stochastic problems one uniform ``[0, 1)`` draw per evaluation is added
    on top by :func:`sccsa.benchmarks.evaluate_batch`.
    """

    id: str
    bounds: Bounds
    batch: Callable[[np.ndarray], np.ndarray] = field(compare=False, repr=False)
    known_min: Optional[float] = 0.0
    stochastic: bool = False

    @property
    def dimension(self) -> int:
        return self.bounds.dimension

    @property
    def f_min(self) -> Optional[float]:
        return self.known_min


@dataclass
class Agent:
    position: np.ndarray
    fitness: float
    memory: np.ndarray
    memory_fitness: float


@dataclass
class GlobalBest:
    position: np.ndarray
    fitness: float


@dataclass
class StepDraws:
    """Random numbers consumed by one agent update.

    ``r_select`` picks the target (global best vs. partner), ``r4`` picks the
    movement operator, ``r_flight`` scales the crow flight, ``awareness_draw``
    is compared against AP in standalone CSA. ``r2`` and ``r3`` are per-dimension.
    """

    r2: np.ndarray
    r3: np.ndarray
    r4: float = 0.0
    r1: float = 0.0
    r_select: float = 0.0
    r_flight: float = 0.0
    awareness_draw: float = 0.0

    def __post_init__(self):
        self.r2 = np.atleast_1d(np.asarray(self.r2, dtype=np.float64))
        self.r3 = np.atleast_1d(np.asarray(self.r3, dtype=np.float64))


def clamp_to_bounds(p, b: Bounds) -> np.ndarray:
    """Hard-clamp a position (or an ``(n, d)`` population) into ``b``."""
    p = np.asarray(p, dtype=np.float64)
    if p.shape[-1] != b.dimension:
        raise DimensionError(f"position has {p.shape[-1]} coordinates, bounds have {b.dimension}")
    return np.minimum(np.maximum(p, b.lower), b.upper)


class RngStream:
    """Seeded, single-owner stream of uniform draws (Philox-4x64)."""

    def __init__(self, seed: int):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ArgumentError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self.seed = seed
        self._gen = np.random.Generator(np.random.Philox(key=seed))

    def next_uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        if not lo < hi:
            raise ArgumentError(f"need lo < hi, got lo={lo}, hi={hi}")
        return float(self._uniform(lo, hi, None))

    def uniform(self, lo: float, hi: float, size) -> np.ndarray:
        if not lo < hi:
            raise ArgumentError(f"need lo < hi, got lo={lo}, hi={hi}")
        return self._uniform(lo, hi, size)

    def _uniform(self, lo, hi, size):
        u = self._gen.random(size)
        if lo == 0.0 and hi == 1.0:
            return u
        out = lo + (hi - lo) * u
        # lo + (hi - lo) * u can round up to hi for u just below 1
        return np.minimum(out, np.nextafter(hi, lo))

    def integers(self, lo: int, hi: int, size) -> np.ndarray:
        return self._gen.integers(lo, hi, size=size)


def derive_seed(base_seed: int, *parts) -> int:
    """Stable 64-bit seed from a base seed and identifying parts.

    SHA-256 over ``"base_seed|part0|part1|..."``; the first 8 bytes of the digest
    are read little-endian.
    """
    text = "|".join([str(int(base_seed))] + [str(p) for p in parts])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")
