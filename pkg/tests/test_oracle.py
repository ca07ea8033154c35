import math

import pytest

import pcoheading as pco
from pcoheading.oracle import OracleConfig, oracle_run
from pcoheading.torus import circular_distance

from conftest import PERIOD, W0, WMAX, desync_config, sync_config


def max_sample_discrepancy(engine_trace, oracle_trace):
    engine_rows = {round(s.t, 9): s for s in engine_trace.samples}
    worst = 0.0
    matched = 0
    for row in oracle_trace.samples:
        ref = engine_rows.get(round(row.t, 9))
        if ref is None:
            continue
        matched += 1
        for a, b in zip(ref.phases, row.phases):
            worst = max(worst, circular_distance(a % (2 * math.pi),
                                                 b % (2 * math.pi)))
    assert matched > 1
    return worst


class TestOracleConfig:
    def test_delay_rejected(self):
        cfg = sync_config(delay=pco.DelayModel(kind="fixed", value=0.05), t_end=10.0)
        with pytest.raises(pco.ConfigError):
            oracle_run(cfg, step=1e-3)

    def test_drops_rejected(self):
        base = sync_config(t_end=10.0)
        cfg = pco.SimConfig(
            n=base.n, omega0=base.omega0, omega_max=base.omega_max, prc=base.prc,
            topology=base.topology, initial_headings=base.initial_headings,
            drop_prob=0.1, t_end=10.0, sample_interval=0.5)
        with pytest.raises(pco.ConfigError):
            oracle_run(cfg, step=1e-3)

    def test_coarse_step_rejected(self):
        with pytest.raises(pco.ConfigError):
            OracleConfig(base=sync_config(t_end=10.0), step=1.0)

    def test_misaligned_sample_interval_rejected(self):
        with pytest.raises(pco.ConfigError):
            OracleConfig(base=sync_config(t_end=10.0, sample_interval=0.5),
                         step=3e-4)


class TestFreeOscillator:
    def test_firing_times_within_one_step(self):
        cfg = pco.SimConfig(
            n=1, omega0=W0, omega_max=WMAX, prc=pco.SyncPrc(alpha=0.5),
            topology=pco.all_to_all(1), initial_headings=[0.0],
            t_end=55.0, sample_interval=0.5)
        trace = oracle_run(cfg, step=1e-4)
        times = [m.t for m in trace.fire_marks]
        assert times == pytest.approx([10.0, 20.0, 30.0, 40.0, 50.0], abs=1e-4)


class TestCrossValidation:
    def test_sync_short_run_agrees(self):
        cfg = sync_config(t_end=5 * PERIOD)
        worst = max_sample_discrepancy(pco.run(cfg), oracle_run(cfg, step=1e-3))
        assert worst < 10 * W0 * 1e-3

    def test_desync_short_run_agrees(self):
        cfg = desync_config(t_end=5 * PERIOD)
        engine_trace = pco.run(cfg)
        oracle_trace = oracle_run(cfg, step=1e-3)
        worst = max_sample_discrepancy(engine_trace, oracle_trace)
        assert worst < 10 * W0 * 1e-3
        # the desync measure series agrees pointwise at sample times too
        engine_p = {round(t, 9): p for t, p in engine_trace.p_rows}
        compared = 0
        for t, p in oracle_trace.p_rows:
            ref = engine_p.get(round(t, 9))
            if ref is not None:
                assert abs(p - ref) < 10 * W0 * 1e-3
                compared += 1
        assert compared > 10

    def test_oracle_respects_rate_constraint(self):
        cfg = sync_config(t_end=5 * PERIOD)
        trace = oracle_run(cfg, step=1e-3)
        for prev, cur in zip(trace.samples, trace.samples[1:]):
            dt = cur.t - prev.t
            for a, b in zip(prev.headings, cur.headings):
                assert circular_distance(a, b) <= WMAX * dt + 1e-9
