import numpy as np
import pytest

from pncsim import (
    PolicyConfig,
    classify_stability,
    compare_policies,
    generic_scenario,
    natural_scenario,
    run,
    sweep_region,
)
from pncsim.sim import SimulationTrace, _SlotStream, slot_generator


MW = PolicyConfig(kind="maxweight")
Q2 = PolicyConfig(kind="qpnc", horizon=2, tau_hard=2)


@pytest.fixture(scope="module")
def generic():
    return generic_scenario()


@pytest.fixture(scope="module")
def natural():
    return natural_scenario()


def test_run_reproducible(generic):
    a = run(generic.spec, Q2, 400, 3, q0=generic.initial_queue)
    b = run(generic.spec, Q2, 400, 3, q0=generic.initial_queue)
    for field in ("queues", "sigmas", "controls", "link_success", "arrivals"):
        assert np.array_equal(getattr(a, field), getattr(b, field))


def test_conservation_exact(generic, natural):
    for sc, cfg in ((generic, Q2), (natural, PolicyConfig(kind="qpnc", horizon=3, tau_hard=1))):
        tr = run(sc.spec, cfg, 500, 11, q0=sc.initial_queue, sigma0=sc.initial_sigma)
        B = sc.spec.link_matrix
        for t in range(tr.length):
            realized = B * tr.link_success[t][np.newaxis, :]
            expected = tr.queues[t] + realized @ tr.controls[t] + tr.arrivals[t]
            assert np.array_equal(tr.queues[t + 1], expected)


def test_environment_identical_across_policies(generic):
    # arrivals, successes and channel path may not depend on the controls
    t_mw = run(generic.spec, MW, 600, 5, q0=generic.initial_queue)
    t_q2 = run(generic.spec, Q2, 600, 5, q0=generic.initial_queue)
    assert np.array_equal(t_mw.arrivals, t_q2.arrivals)
    assert np.array_equal(t_mw.link_success, t_q2.link_success)
    assert np.array_equal(t_mw.sigmas, t_q2.sigmas)


def test_environment_depends_only_on_slot_and_seed(natural):
    short = run(natural.spec, MW, 100, 9, q0=natural.initial_queue)
    long = run(natural.spec, MW, 300, 9, q0=natural.initial_queue)
    assert np.array_equal(short.arrivals, long.arrivals[:100])
    assert np.array_equal(short.link_success, long.link_success[:100])


def test_slot_stream_matches_fresh_generators():
    stream = _SlotStream(123)
    for t in (0, 7, 3, 10**9, 2):
        fresh = slot_generator(123, t).random(5)
        reused = stream.rekey(t).random(5)
        assert np.array_equal(fresh, reused)


def test_zero_arrivals_zero_trace():
    sc = generic_scenario(rate1=0.0, rate2=0.0)
    for cfg in (MW, Q2):
        tr = run(sc.spec, cfg, 300, 2, q0=sc.initial_queue)
        assert not tr.queues.any()
        assert not tr.controls.any()
        assert tr.total_departures == 0


def test_summary_fields(generic):
    tr = run(generic.spec, Q2, 400, 1, q0=generic.initial_queue)
    assert tr.length == 400
    assert tr.avg_queue.shape == (2,)
    assert np.array_equal(tr.final_queue, tr.queues[400])
    inflow = int(tr.arrivals.sum())
    assert tr.total_departures == inflow - int(tr.queues[400].sum())


# ---------------------------------------------------------------------------
# stability classification


def _trace_from_totals(totals):
    T = len(totals)
    queues = np.zeros((T + 1, 1), dtype=np.int64)
    queues[:T, 0] = totals
    return SimulationTrace(
        queues=queues,
        sigmas=np.ones(T + 1, dtype=np.int64),
        controls=np.zeros((T, 1), dtype=np.int8),
        link_success=np.zeros((T, 1), dtype=np.int8),
        arrivals=np.zeros((T, 1), dtype=np.int64),
        seed=0,
    )


def test_classify_constant_trace_stable():
    verdict = classify_stability(_trace_from_totals(np.full(400, 7)))
    assert verdict.slope == pytest.approx(0.0, abs=1e-12)
    assert verdict.stable


def test_classify_linear_growth():
    totals = np.arange(500) * 2
    verdict = classify_stability(_trace_from_totals(totals))
    assert verdict.slope == pytest.approx(2.0, abs=1e-9)
    assert not verdict.stable


def test_classify_rejects_short_traces(generic):
    tr = run(generic.spec, MW, 150, 0, q0=generic.initial_queue)
    with pytest.raises(ValueError):
        classify_stability(tr)


def test_classify_window_uses_tail():
    totals = np.concatenate([np.arange(300) * 3, np.full(300, 900)])
    verdict = classify_stability(_trace_from_totals(totals), window_fraction=0.4)
    assert verdict.stable


# ---------------------------------------------------------------------------
# sweeps and comparisons


def test_sweep_zero_point_stable(generic):
    res = sweep_region(generic.spec, MW, [(0.0, 0.0)], 400, range(2))
    point = res[(0.0, 0.0)]
    assert point.stable
    assert point.stable_fraction == 1.0


def test_sweep_unrealizable_rate(generic):
    with pytest.raises(ValueError):
        sweep_region(generic.spec, MW, [(3.5, 0.0)], 400, range(1))


def test_compare_identical_configs_identical_rows(natural):
    cfgs = [PolicyConfig(kind="qpnc", horizon=2, tau_hard=1),
            PolicyConfig(kind="qpnc", horizon=2, tau_hard=1)]
    rows = compare_policies(natural.spec, cfgs, 400, range(3),
                            q0=natural.initial_queue)
    half = len(rows) // 2
    for a, b in zip(rows[:half], rows[half:]):
        assert a == b


def test_compare_is_paired(generic):
    rows = compare_policies(generic.spec, [MW, MW], 300, range(2),
                            q0=generic.initial_queue)
    assert rows[0]["avg_queue"] == rows[2]["avg_queue"]
