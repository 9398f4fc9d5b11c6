import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chiplet_sim.kernel import Kernel, SimulationError, seconds_to_ticks, ticks_to_seconds
from chiplet_sim.presets import preset
from chiplet_sim.system import simulate


def collect(kernel):
    seen = []
    kernel.register_callback("t", lambda ev: seen.append((ev.time, ev.data)))
    return seen


def test_pop_orders_by_time():
    k = Kernel()
    seen = collect(k)
    k.schedule(100, "t", "x", "late")
    k.schedule(50, "t", "x", "early")
    k.run_until()
    assert seen == [(50, "early"), (100, "late")]


def test_equal_time_is_fifo():
    k = Kernel()
    seen = collect(k)
    k.schedule(100, "t", "x", "A")
    k.schedule(100, "t", "x", "B")
    k.run_until()
    assert [d for _, d in seen] == ["A", "B"]


def test_schedule_into_past_is_rejected():
    k = Kernel()
    collect(k)
    k.schedule(10, "t", "x")
    k.run_until()
    with pytest.raises(SimulationError):
        k.schedule(k.now() - 1, "t", "x")


def test_handler_scheduling_into_past_aborts():
    k = Kernel()

    def bad(ev):
        k.schedule(ev.time - 1, "t", "x")

    k.register_callback("t", bad)
    k.schedule(5, "t", "x")
    with pytest.raises(SimulationError):
        k.run_until()


def test_run_until_limit():
    k = Kernel()
    collect(k)
    for t in (50, 100, 300):
        k.schedule(t, "t", "x")
    stats = k.run_until(200)
    assert (stats.events, stats.clock) == (2, 200)
    assert k.pending() == 1


def test_empty_queue_advances_to_limit():
    k = Kernel()
    stats = k.run_until(10)
    assert (stats.events, stats.clock) == (0, 10)


def test_now():
    k = Kernel()
    assert k.now() == 0
    inside = []
    k.register_callback("t", lambda ev: inside.append(k.now()))
    k.schedule(42, "t", "x")
    k.run_until(200)
    assert inside == [42]
    assert k.now() == 200


def test_time_conversion_is_picoseconds():
    assert ticks_to_seconds(11_700_000) == pytest.approx(1.17e-5, rel=0, abs=1e-20)
    assert seconds_to_ticks(1e-9) == 1000


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 20), min_size=1, max_size=60), st.integers(0, 2**32))
def test_equal_time_batches_keep_scheduling_order(times, seed):
    k = Kernel()
    seen = collect(k)
    order = list(range(len(times)))
    random.Random(seed).shuffle(order)
    for i in order:
        k.schedule(times[i], "t", "x", i)
    k.run_until()
    popped_times = [t for t, _ in seen]
    assert popped_times == sorted(popped_times)
    for t in set(times):
        got = [d for tt, d in seen if tt == t]
        assert got == [i for i in order if times[i] == t]


def test_handlers_scheduling_more_events_stay_monotone():
    k = Kernel()
    rng = random.Random(5)
    last = []

    def h(ev):
        last.append(ev.time)
        if len(last) < 500:
            k.schedule(ev.time + rng.randint(0, 3), "t", "x")

    k.register_callback("t", h)
    k.schedule(0, "t", "x")
    k.schedule(0, "t", "x")
    k.run_until()
    assert last == sorted(last)


def test_same_seed_gives_identical_trace():
    a = simulate(preset("exp2"), trace=True)
    b = simulate(preset("exp2"), trace=True)
    assert a.trace == b.trace
    assert a.summary == b.summary
    assert len(a.trace) > 1000
