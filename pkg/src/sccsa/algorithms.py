"""CSA, SCA, the hybrid SCCSA, and a random-search control.

The per-agent operators (:func:`sca_update`, :func:`csa_update`,
:func:`sccsa_update`) take their random numbers explicitly so they can be
tested with hand-picked draws. The population steps pre-draw every random
number for one iteration in a fixed order, then apply the batched kernel.

Draw order per iteration (this is what makes a seed reproducible):

* ``sccsa``: partner indices, r_select, r4, r_flight, [r1 if paper_literal],
  r2, r3, then one noise draw per agent on stochastic problems.
* ``sca``: r4, [r1], r2, r3, noise.
* ``csa``: partner indices, awareness draws, r_flight, random positions, noise.
* ``random``: positions, noise.

Initialization draws the uniform population, then noise.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from . import _kernels as K
from .benchmarks import evaluate_batch
from .core import (
    Agent,
    ConfigurationError,
    DimensionError,
    GlobalBest,
    Problem,
    RngStream,
    StepDraws,
    clamp_to_bounds,
)

R1_MODES = ("sca_original", "paper_literal")
DIFF_MODES = ("paper_abs", "signed")
PARTNER_SOURCES = ("memory", "position")
ALGORITHMS = ("sccsa", "csa", "sca", "random")


def _check_mode(name, value, allowed):
    if value not in allowed:
        raise ConfigurationError(f"{name} must be one of {allowed}, got {value!r}")


@dataclass(frozen=True)
class CsaParams:
    awareness_probability: float = 0.1
    flight_length: float = 2.0
    diff_mode: str = "signed"

    def __post_init__(self):
        if not 0.0 <= self.awareness_probability <= 1.0:
            raise ConfigurationError(f"awareness probability must lie in [0, 1], got {self.awareness_probability}")
        if not self.flight_length > 0:
            raise ConfigurationError(f"flight length must be > 0, got {self.flight_length}")
        _check_mode("diff_mode", self.diff_mode, DIFF_MODES)


@dataclass(frozen=True)
class ScaParams:
    r1_mode: str = "sca_original"
    a: float = 2.0

    def __post_init__(self):
        _check_mode("r1_mode", self.r1_mode, R1_MODES)
        if not self.a > 0:
            raise ConfigurationError(f"a must be > 0, got {self.a}")


@dataclass(frozen=True)
class SccsaParams:
    target_threshold: float = 0.5
    sine_threshold: float = 0.3
    cosine_threshold: float = 0.6
    fl: float = 2.0
    r1_mode: str = "sca_original"
    a: float = 2.0
    diff_mode: str = "signed"
    partner_source: str = "memory"

    def __post_init__(self):
        if not 0.0 <= self.sine_threshold <= self.cosine_threshold <= 1.0:
            raise ConfigurationError("need 0 <= sine_threshold <= cosine_threshold <= 1")
        if not 0.0 <= self.target_threshold <= 1.0:
            raise ConfigurationError("target_threshold must lie in [0, 1]")
        if not self.fl > 0:
            raise ConfigurationError(f"fl must be > 0, got {self.fl}")
        if not self.a > 0:
            raise ConfigurationError(f"a must be > 0, got {self.a}")
        _check_mode("r1_mode", self.r1_mode, R1_MODES)
        _check_mode("diff_mode", self.diff_mode, DIFF_MODES)
        _check_mode("partner_source", self.partner_source, PARTNER_SOURCES)


@dataclass(frozen=True)
class RandomSearchParams:
    pass


DEFAULT_PARAMS = {
    "sccsa": SccsaParams,
    "csa": CsaParams,
    "sca": ScaParams,
    "random": RandomSearchParams,
}


def default_params(algorithm: str):
    if algorithm not in DEFAULT_PARAMS:
        raise ConfigurationError(f"unknown algorithm id {algorithm!r}; known: {', '.join(ALGORITHMS)}")
    return DEFAULT_PARAMS[algorithm]()


# --- random-number ranges ---------------------------------------------------

def draw_ranges(r1_mode: str):
    """Upper ends of the r2 and r3 draws for an amplitude mode."""
    if r1_mode == "sca_original":
        return 2.0 * np.pi, 2.0
    return 1.0, 1.0


def amplitude_r1(mode: str, t: int, T: int, stream: Optional[RngStream] = None, a: float = 2.0) -> float:
    """Step amplitude at iteration ``t`` of ``T``.

    ``sca_original`` decays linearly from ``a`` to 0; ``paper_literal`` is a
    fresh uniform ``[0, 1)`` draw.
    """
    _check_mode("r1_mode", mode, R1_MODES)
    if mode == "sca_original":
        return a - t * a / T
    if stream is None:
        raise ConfigurationError("paper_literal amplitude needs a stream")
    return stream.next_uniform(0.0, 1.0)


# --- per-agent operators ------------------------------------------------------

def _same_dim(*arrays):
    d = arrays[0].shape[-1]
    for arr in arrays[1:]:
        if arr.shape[-1] != d:
            raise DimensionError(f"dimension mismatch: {d} vs {arr.shape[-1]}")


def _sine_move(x, target, r1, r2, r3):
    return x + r1 * np.sin(r2) * np.abs(r3 * target - x)


def _cosine_move(x, target, r1, r2, r3):
    return x + r1 * np.cos(r2) * np.abs(r3 * target - x)


def _crow_move(x, target, r_flight, fl, diff_mode):
    diff = (target - x) if diff_mode == "signed" else np.abs(target - x)
    return x + (r_flight * fl) * diff


def sca_update(x, target, r1: float, draws: StepDraws) -> np.ndarray:
    """Sine move when ``draws.r4 < 0.5``, cosine move otherwise. No clamping."""
    x = np.asarray(x, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    _same_dim(x, target, draws.r2, draws.r3)
    if draws.r4 < 0.5:
        return _sine_move(x, target, r1, draws.r2, draws.r3)
    return _cosine_move(x, target, r1, draws.r2, draws.r3)


def csa_update(x, memory_target, r_flight: float, fl: float, diff_mode: str = "signed") -> np.ndarray:
    """Crow flight toward ``memory_target``; ``paper_abs`` uses ``|m - x|``."""
    _check_mode("diff_mode", diff_mode, DIFF_MODES)
    x = np.asarray(x, dtype=np.float64)
    memory_target = np.asarray(memory_target, dtype=np.float64)
    _same_dim(x, memory_target)
    return _crow_move(x, memory_target, r_flight, fl, diff_mode)


def sccsa_update(x, target, r1: float, draws: StepDraws, params: SccsaParams = SccsaParams()) -> np.ndarray:
    """Hybrid move: sine, cosine or crow flight toward the selected target.

    Cut points are half-open: ``[0, sine)``, ``[sine, cosine)``, ``[cosine, 1]``.
    There is no random-reposition branch.
    """
    x = np.asarray(x, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    _same_dim(x, target, draws.r2, draws.r3)
    if draws.r4 < params.sine_threshold:
        return _sine_move(x, target, r1, draws.r2, draws.r3)
    if draws.r4 < params.cosine_threshold:
        return _cosine_move(x, target, r1, draws.r2, draws.r3)
    return _crow_move(x, target, draws.r_flight, params.fl, params.diff_mode)


def update_memory(agent: Agent, new_pos, new_fit: float) -> Agent:
    """Move the agent; replace its memory only on strict improvement."""
    new_pos = np.array(new_pos, dtype=np.float64)
    if new_fit < agent.memory_fitness:
        return Agent(new_pos, float(new_fit), new_pos.copy(), float(new_fit))
    return Agent(new_pos, float(new_fit), agent.memory, agent.memory_fitness)


# --- population state ----------------------------------------------------------

@dataclass
class PopulationState:
    positions: np.ndarray
    fitness: np.ndarray
    memory: np.ndarray
    memory_fitness: np.ndarray
    best_position: np.ndarray
    best_fitness: float
    t: int
    T: int
    fe_count: int
    budget: int

    @property
    def size(self) -> int:
        return self.positions.shape[0]

    @property
    def agents(self) -> List[Agent]:
        return [Agent(self.positions[i].copy(), float(self.fitness[i]), self.memory[i].copy(),
                      float(self.memory_fitness[i])) for i in range(self.size)]

    @property
    def best(self) -> GlobalBest:
        return GlobalBest(self.best_position.copy(), self.best_fitness)

    def absorb(self, new_positions, new_fitness):
        """Take new positions, update memories (strict) and the global best (first found)."""
        improved = new_fitness < self.memory_fitness
        self.positions = new_positions
        self.fitness = new_fitness
        self.memory[improved] = new_positions[improved]
        self.memory_fitness[improved] = new_fitness[improved]
        i = int(np.argmin(self.memory_fitness))
        if self.memory_fitness[i] < self.best_fitness:
            self.best_fitness = float(self.memory_fitness[i])
            self.best_position = self.memory[i].copy()
        self.fe_count += new_positions.shape[0]


def select_target(state: PopulationState, r_select: float, partner_index: int,
                  threshold: float = 0.5, partner_source: str = "memory") -> np.ndarray:
    """Global best when ``r_select < threshold``, else the partner's memory (or position)."""
    if r_select < threshold:
        return state.best_position
    if partner_source == "position":
        return state.positions[partner_index]
    return state.memory[partner_index]


def _partners(stream: RngStream, n: int) -> np.ndarray:
    # uniform over j != i
    k = stream.integers(0, n - 1, n)
    return k + (k >= np.arange(n))


def _noise(problem: Problem, stream: RngStream):
    return stream if problem.stochastic else None


def initialize(problem: Problem, pop_size: int, T: int, budget: int, stream: RngStream) -> PopulationState:
    b = problem.bounds
    x = b.lower + b.width * stream.uniform(0.0, 1.0, (pop_size, b.dimension))
    x = clamp_to_bounds(x, b)
    f = evaluate_batch(problem, x, _noise(problem, stream))
    i = int(np.argmin(f))
    return PopulationState(x, f, x.copy(), f.copy(), x[i].copy(), float(f[i]), 0, T, pop_size, budget)


def _amplitudes(mode, a, t, T, n, stream):
    if mode == "sca_original":
        return np.full(n, a - t * a / T)
    return stream.uniform(0.0, 1.0, n)


def _finish(state, problem, stream, new_x):
    new_x = clamp_to_bounds(new_x, problem.bounds)
    new_f = evaluate_batch(problem, new_x, _noise(problem, stream))
    state.absorb(new_x, new_f)
    state.t += 1


def sccsa_step(state: PopulationState, problem: Problem, params: SccsaParams, stream: RngStream) -> None:
    n, d = state.positions.shape
    partners = _partners(stream, n)
    r_select = stream.uniform(0.0, 1.0, n)
    r4 = stream.uniform(0.0, 1.0, n)
    r_flight = stream.uniform(0.0, 1.0, n)
    r1 = _amplitudes(params.r1_mode, params.a, state.t, state.T, n, stream)
    r2_hi, r3_hi = draw_ranges(params.r1_mode)
    r2 = stream.uniform(0.0, r2_hi, (n, d))
    r3 = stream.uniform(0.0, r3_hi, (n, d))

    pool = state.positions if params.partner_source == "position" else state.memory
    targets = np.where((r_select < params.target_threshold)[:, None], state.best_position, pool[partners])
    new_x = K.move(state.positions, targets, r1, r2, r3, r4, r_flight, params.fl,
                   params.sine_threshold, params.cosine_threshold, params.diff_mode == "signed")
    _finish(state, problem, stream, new_x)


def sca_step(state: PopulationState, problem: Problem, params: ScaParams, stream: RngStream) -> None:
    n, d = state.positions.shape
    r4 = stream.uniform(0.0, 1.0, n)
    r1 = _amplitudes(params.r1_mode, params.a, state.t, state.T, n, stream)
    r2_hi, r3_hi = draw_ranges(params.r1_mode)
    r2 = stream.uniform(0.0, r2_hi, (n, d))
    r3 = stream.uniform(0.0, r3_hi, (n, d))
    targets = np.broadcast_to(state.best_position, (n, d))
    # cosine cut above 1: every r4 >= 0.5 takes the cosine branch
    new_x = K.move(state.positions, np.ascontiguousarray(targets), r1, r2, r3, r4, np.zeros(n), 1.0,
                   0.5, 2.0, False)
    _finish(state, problem, stream, new_x)


def csa_step(state: PopulationState, problem: Problem, params: CsaParams, stream: RngStream) -> None:
    n, d = state.positions.shape
    if n < 2:
        raise ConfigurationError("CSA needs at least two agents")
    b = problem.bounds
    partners = _partners(stream, n)
    aware = stream.uniform(0.0, 1.0, n)
    r_flight = stream.uniform(0.0, 1.0, n)
    fresh = b.lower + b.width * stream.uniform(0.0, 1.0, (n, d))
    # both cuts below 0: every row takes the crow-flight branch
    follow = K.move(state.positions, state.memory[partners], np.zeros(n), np.zeros((n, d)), np.zeros((n, d)),
                    np.zeros(n), r_flight, params.flight_length, -1.0, -1.0, params.diff_mode == "signed")
    new_x = np.where((aware >= params.awareness_probability)[:, None], follow, fresh)
    _finish(state, problem, stream, new_x)


csa_step_standalone = csa_step


def random_step(state: PopulationState, problem: Problem, params, stream: RngStream) -> None:
    n, d = state.positions.shape
    b = problem.bounds
    new_x = b.lower + b.width * stream.uniform(0.0, 1.0, (n, d))
    _finish(state, problem, stream, new_x)


STEPS = {
    "sccsa": sccsa_step,
    "csa": csa_step,
    "sca": sca_step,
    "random": random_step,
}


@dataclass(eq=False)
class RunRecord:
    seed: int
    algorithm: str
    problem: str
    trace: np.ndarray
    final_best_fitness: float
    final_best_position: np.ndarray
    fe_count: int
    wall_time: float = field(default=0.0, compare=False)
    run_index: int = 0

    @property
    def iterations(self) -> int:
        return len(self.trace) - 1

    def __eq__(self, other):
        # wall_time is excluded: identical seeds must compare equal
        if not isinstance(other, RunRecord):
            return NotImplemented
        return (
            (self.seed, self.algorithm, self.problem, self.fe_count, self.run_index)
            == (other.seed, other.algorithm, other.problem, other.fe_count, other.run_index)
            and np.array_equal(self.trace, other.trace)
            and self.final_best_fitness == other.final_best_fitness
            and np.array_equal(self.final_best_position, other.final_best_position)
        )


def iterations_for(budget_fe: int, pop_size: int) -> int:
    """Update iterations after initialization that fit in the budget."""
    if pop_size < 2:
        raise ConfigurationError(f"population size must be >= 2, got {pop_size}")
    if budget_fe < pop_size:
        raise ConfigurationError(f"budget {budget_fe} is smaller than the population size {pop_size}")
    return budget_fe // pop_size - 1


def run(problem: Problem, algorithm: str = "sccsa", params=None, pop_size: int = 30,
        budget_fe: int = 100_000, seed: int = 0, callback: Optional[Callable[[PopulationState], None]] = None,
        run_index: int = 0) -> RunRecord:
    """One seeded optimization run.

    Initializes ``pop_size`` agents (``pop_size`` evaluations), then performs
    ``budget_fe // pop_size - 1`` update iterations. ``trace[k]`` is the best
    fitness after iteration ``k`` (``trace[0]``: after initialization).
    ``callback`` sees the state after initialization and after every iteration.
    """
    if algorithm not in STEPS:
        raise ConfigurationError(f"unknown algorithm id {algorithm!r}; known: {', '.join(ALGORITHMS)}")
    if params is None:
        params = default_params(algorithm)
    elif not isinstance(params, DEFAULT_PARAMS[algorithm]):
        raise ConfigurationError(f"{algorithm} expects {DEFAULT_PARAMS[algorithm].__name__}, got {type(params).__name__}")
    T = iterations_for(budget_fe, pop_size)
    step = STEPS[algorithm]

    start = time.perf_counter()
    stream = RngStream(seed)
    state = initialize(problem, pop_size, T, budget_fe, stream)
    trace = np.empty(T + 1)
    trace[0] = state.best_fitness
    if callback is not None:
        callback(state)
    for k in range(1, T + 1):
        step(state, problem, params, stream)
        trace[k] = state.best_fitness
        if callback is not None:
            callback(state)
    return RunRecord(
        seed=seed,
        algorithm=algorithm,
        problem=problem.id,
        trace=trace,
        final_best_fitness=state.best_fitness,
        final_best_position=state.best_position.copy(),
        fe_count=state.fe_count,
        wall_time=time.perf_counter() - start,
        run_index=run_index,
    )
