import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sccsa import _kernels as K
from sccsa.algorithms import (
    CsaParams,
    PopulationState,
    ScaParams,
    SccsaParams,
    amplitude_r1,
    csa_step,
    csa_update,
    initialize,
    iterations_for,
    run,
    sca_update,
    sccsa_update,
    select_target,
    update_memory,
)
from sccsa.benchmarks import get_benchmark
from sccsa.core import Agent, ConfigurationError, DimensionError, RngStream, StepDraws


def draws(r4, r2=(0.5,), r3=(0.5,), r_flight=0.0):
    return StepDraws(r2=list(r2), r3=list(r3), r4=r4, r_flight=r_flight)


# hand evaluations with the math module
SINE_HALF = math.sin(0.5) * abs(0.5 * 1.0 - 0.0)
COSINE_HALF = math.cos(0.5) * abs(0.5 * 1.0 - 0.0)


def test_hand_values():
    assert SINE_HALF == pytest.approx(0.23971, abs=1e-5)
    assert COSINE_HALF == pytest.approx(0.43879, abs=1e-5)


def test_amplitude_schedule():
    assert amplitude_r1("sca_original", 0, 100) == 2.0
    assert amplitude_r1("sca_original", 50, 100) == 1.0
    v = amplitude_r1("paper_literal", 3, 100, RngStream(1))
    assert 0.0 <= v < 1.0
    with pytest.raises(ConfigurationError):
        amplitude_r1("other", 0, 10)


def test_sca_update_examples():
    out = sca_update([0.0], [1.0], 1.0, draws(0.2))
    assert out[0] == pytest.approx(SINE_HALF, rel=1e-12)
    out = sca_update([0.0], [1.0], 1.0, draws(0.9))
    assert out[0] == pytest.approx(COSINE_HALF, rel=1e-12)
    assert sca_update([2.0], [2.0], 0.7, draws(0.2, r2=[1.3], r3=[1.0])).tolist() == [2.0]


def test_csa_update_examples():
    assert csa_update([2.0], [5.0], 0.4, 2.0, "paper_abs")[0] == pytest.approx(4.4, rel=1e-12)
    assert csa_update([5.0], [2.0], 0.4, 2.0, "signed")[0] == pytest.approx(2.6, rel=1e-12)
    assert csa_update([3.0], [3.0], 0.9, 2.0, "paper_abs").tolist() == [3.0]
    assert csa_update([3.0], [3.0], 0.9, 2.0, "signed").tolist() == [3.0]
    # the printed form never moves downhill in a coordinate
    assert csa_update([5.0], [2.0], 0.4, 2.0, "paper_abs")[0] == pytest.approx(7.4, rel=1e-12)


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        csa_update([1.0, 2.0], [1.0], 0.5, 2.0)
    with pytest.raises(DimensionError):
        sca_update([1.0, 2.0], [1.0, 2.0], 1.0, draws(0.1))


def test_sccsa_update_examples():
    sine = sccsa_update([0.0], [1.0], 1.0, draws(0.1))
    assert np.array_equal(sine, sca_update([0.0], [1.0], 1.0, draws(0.1)))
    crow = sccsa_update([2.0], [5.0], 1.0, draws(0.7, r_flight=0.4), SccsaParams(diff_mode="paper_abs"))
    assert crow[0] == pytest.approx(4.4, rel=1e-12)
    cos = sccsa_update([0.0], [1.0], 1.0, draws(0.45))
    assert cos[0] == pytest.approx(COSINE_HALF, rel=1e-12)


@pytest.mark.parametrize("r4, branch", [(0.0, "sin"), (0.2999, "sin"), (0.3, "cos"), (0.5999, "cos"),
                                        (0.6, "crow"), (0.999, "crow")])
def test_sccsa_branch_cut_points(r4, branch):
    d = draws(r4, r2=[1.1], r3=[0.7], r_flight=0.3)
    out = sccsa_update([0.4], [-2.0], 0.8, d)
    expected = {
        "sin": 0.4 + 0.8 * math.sin(1.1) * abs(0.7 * -2.0 - 0.4),
        "cos": 0.4 + 0.8 * math.cos(1.1) * abs(0.7 * -2.0 - 0.4),
        "crow": 0.4 + 0.3 * 2.0 * (-2.0 - 0.4),
    }[branch]
    assert out[0] == pytest.approx(expected, rel=1e-12)


def _toy_state():
    positions = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])
    memory = np.array([[5.0, 5.0], [6.0, 6.0], [7.0, 7.0]])
    return PopulationState(positions, np.zeros(3), memory, np.array([3.0, 2.0, 1.0]),
                           np.array([9.0, 9.0]), 1.0, 0, 10, 3, 30)


def test_select_target():
    state = _toy_state()
    assert select_target(state, 0.0, 2).tolist() == [9.0, 9.0]
    assert select_target(state, 0.99, 1).tolist() == [6.0, 6.0]
    assert select_target(state, 0.5, 1).tolist() == [6.0, 6.0]
    assert select_target(state, 0.99, 1, partner_source="position").tolist() == [1.0, 1.0]


def test_update_memory_rules():
    agent = Agent(np.zeros(2), 5.0, np.ones(2), 5.0)
    better = update_memory(agent, [2.0, 2.0], 3.0)
    assert better.memory.tolist() == [2.0, 2.0] and better.memory_fitness == 3.0
    worse = update_memory(agent, [2.0, 2.0], 7.0)
    assert worse.memory.tolist() == [1.0, 1.0] and worse.position.tolist() == [2.0, 2.0]
    tie = update_memory(agent, [2.0, 2.0], 5.0)
    assert tie.memory.tolist() == [1.0, 1.0]


def _csa_one_step(ap, seed=3, pop=6):
    p = get_benchmark("f1", 4)
    stream = RngStream(seed)
    state = initialize(p, pop, 10, 60, stream)
    before = state.positions.copy()
    probe = RngStream(seed)
    probe.uniform(0, 1, (pop, 4))  # replay the initialization draw
    partners = probe.integers(0, pop - 1, pop)
    aware = probe.uniform(0, 1, pop)
    r_flight = probe.uniform(0, 1, pop)
    fresh = p.bounds.lower + p.bounds.width * probe.uniform(0, 1, (pop, 4))
    partners = partners + (partners >= np.arange(pop))
    csa_step(state, p, CsaParams(awareness_probability=ap), stream)
    return state, before, partners, aware, r_flight, fresh


def test_csa_awareness_zero_never_rerandomizes():
    state, before, partners, _, r_flight, _ = _csa_one_step(0.0)
    assert np.all(partners != np.arange(6))
    mem = before  # memory equals the initial positions after initialization
    expected = np.clip(before + (r_flight * 2.0)[:, None] * (mem[partners] - before), -100, 100)
    np.testing.assert_allclose(state.positions, expected, rtol=1e-12)


def test_csa_awareness_one_always_rerandomizes():
    state, _, _, _, _, fresh = _csa_one_step(1.0)
    assert np.array_equal(state.positions, fresh)


def test_csa_step_counts_evaluations():
    p = get_benchmark("f1", 10)
    stream = RngStream(0)
    state = initialize(p, 5, 10, 100, stream)
    assert state.fe_count == 5
    csa_step(state, p, CsaParams(), stream)
    assert state.fe_count == 10


def test_run_budget_arithmetic():
    assert iterations_for(100_000, 30) == 3332
    rec = run(get_benchmark("f1"), "sccsa", pop_size=30, budget_fe=100_000, seed=1)
    assert rec.fe_count == 99_990
    assert len(rec.trace) == 3333
    assert np.all(np.diff(rec.trace) <= 0)
    assert rec.trace[-1] == rec.final_best_fitness


def test_random_search_improves_or_holds():
    rec = run(get_benchmark("f1"), "random", budget_fe=1000, seed=5)
    assert rec.final_best_fitness <= rec.trace[0]


def test_same_seed_same_record():
    p = get_benchmark("f7")
    a = run(p, "sccsa", budget_fe=3000, seed=9)
    b = run(p, "sccsa", budget_fe=3000, seed=9)
    assert a == b
    assert np.array_equal(a.trace, b.trace)


def test_run_configuration_errors():
    p = get_benchmark("f1")
    with pytest.raises(ConfigurationError):
        run(p, "sccsa", pop_size=1)
    with pytest.raises(ConfigurationError):
        run(p, "sccsa", pop_size=30, budget_fe=20)
    with pytest.raises(ConfigurationError):
        run(p, "nosuch")
    with pytest.raises(ConfigurationError):
        run(p, "csa", params=ScaParams())
    with pytest.raises(ConfigurationError):
        SccsaParams(sine_threshold=0.7, cosine_threshold=0.6)
    with pytest.raises(ConfigurationError):
        CsaParams(awareness_probability=1.5)


@pytest.mark.parametrize("params", [SccsaParams(r1_mode="paper_literal"), SccsaParams(diff_mode="paper_abs"),
                                    SccsaParams(partner_source="position")])
def test_variants_run(params):
    rec = run(get_benchmark("f2"), "sccsa", params, budget_fe=1500, seed=2)
    assert np.all(np.diff(rec.trace) <= 0)


def test_paper_literal_draw_ranges():
    seen = []

    def spy(state):
        seen.append(state.positions.copy())

    run(get_benchmark("f1", 3), "sca", ScaParams(r1_mode="paper_literal"), pop_size=4, budget_fe=40, seed=1,
        callback=spy)
    assert len(seen) == 10


def test_sccsa_default_decay_shrinks_steps():
    p = get_benchmark("f1", 5)
    steps = []
    prev = {}

    def spy(state):
        if "x" in prev:
            steps.append(np.abs(state.positions - prev["x"]).max())
        prev["x"] = state.positions.copy()

    run(p, "sca", pop_size=10, budget_fe=2000, seed=4, callback=spy)
    assert np.mean(steps[-20:]) < np.mean(steps[:20])


@settings(max_examples=100, deadline=None)
@given(
    x=st.lists(st.floats(-50, 50), min_size=1, max_size=6),
    r1=st.floats(0, 2),
    r4=st.floats(0, 0.9999),
    r_flight=st.floats(0, 0.9999),
    seed=st.integers(0, 2**32),
)
def test_fixed_point_all_branches(x, r1, r4, r_flight, seed):
    d = len(x)
    r2 = RngStream(seed).uniform(0, 2 * np.pi, d)
    step = StepDraws(r2=r2, r3=np.ones(d), r4=r4, r_flight=r_flight)
    for mode in ("paper_abs", "signed"):
        out = sccsa_update(x, x, r1, step, SccsaParams(diff_mode=mode))
        assert np.array_equal(out, np.asarray(x, dtype=np.float64))


@settings(max_examples=100, deadline=None)
@given(
    x=st.lists(st.floats(-50, 50), min_size=1, max_size=6),
    seed=st.integers(0, 2**32),
    t=st.integers(0, 99),
)
def test_sca_original_step_bound(x, seed, t):
    x = np.asarray(x)
    s = RngStream(seed)
    d = x.size
    target = s.uniform(-50, 50, d)
    r1 = amplitude_r1("sca_original", t, 100)
    step = StepDraws(r2=s.uniform(0, 2 * np.pi, d), r3=s.uniform(0, 2, d), r4=s.next_uniform())
    out = sccsa_update(x, target, r1, StepDraws(r2=step.r2, r3=step.r3, r4=step.r4 * 0.6))
    bound = r1 * np.abs(step.r3 * target - x)
    assert np.all(np.abs(out - x) <= bound * (1 + 1e-12) + 1e-300)


# --- batched kernels -------------------------------------------------------------

def _random_batch(seed, n=64, d=7):
    s = RngStream(seed)
    x = s.uniform(-10, 10, (n, d))
    target = s.uniform(-10, 10, (n, d))
    r1 = s.uniform(0, 2, n)
    r2 = s.uniform(0, 2 * np.pi, (n, d))
    r3 = s.uniform(0, 2, (n, d))
    r4 = s.uniform(0, 1, n)
    rf = s.uniform(0, 1, n)
    return x, target, r1, r2, r3, r4, rf


@pytest.mark.parametrize("signed", [False, True])
def test_numpy_kernel_matches_per_agent_operator_bitwise(signed):
    x, target, r1, r2, r3, r4, rf = _random_batch(17)
    params = SccsaParams(diff_mode="signed" if signed else "paper_abs")
    out = K.move_numpy(x, target, r1, r2, r3, r4, rf, 2.0, 0.3, 0.6, signed)
    for i in range(x.shape[0]):
        ref = sccsa_update(x[i], target[i], r1[i], StepDraws(r2=r2[i], r3=r3[i], r4=r4[i], r_flight=rf[i]), params)
        assert np.array_equal(out[i], ref)


@pytest.mark.skipif(not K.USE_NUMBA, reason="numba backend disabled")
@pytest.mark.parametrize("signed", [False, True])
def test_numba_kernel_matches_numpy_kernel(signed):
    for seed in range(5):
        args = _random_batch(seed)
        a = K.move_numba(*args, 2.0, 0.3, 0.6, signed)
        b = K.move_numpy(*args, 2.0, 0.3, 0.6, signed)
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


def test_numpy_backend_selected_by_env(tmp_path):
    code = (
        "import sccsa, numpy as np\n"
        "from sccsa import _kernels as K\n"
        "from sccsa.benchmarks import get_benchmark\n"
        "assert K.BACKEND == 'numpy' and K.move is K.move_numpy\n"
        "r = sccsa.run(get_benchmark('f1'), 'sccsa', budget_fe=600, seed=3)\n"
        "print(repr(r.trace[:5].tolist()))\n"
    )
    env = dict(os.environ, SCCSA_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    numpy_trace = np.array(eval(out.stdout))
    here = run(get_benchmark("f1"), "sccsa", budget_fe=600, seed=3).trace[:5]
    np.testing.assert_allclose(numpy_trace, here, rtol=1e-9)
