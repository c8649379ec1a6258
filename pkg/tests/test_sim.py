"""Fixed-step delay-differential simulator and trace classification."""

import json
import math

import numpy as np
import pytest

from rshaper.design import DelayCompensator, PiController
from rshaper.lti import StateSpaceModel
from rshaper.plants import paper_verbatim_statespace
from rshaper.sim import (
    SIM_BACKEND,
    ControllerConfig,
    Scenario,
    SimConfig,
    SimTrace,
    classify_trace,
    simulate_closed_loop,
    simulate_open_loop,
)

FIRST_ORDER_LAG = StateSpaceModel([[-1.0]], [1.0], [1.0])
INTEGRATOR = StateSpaceModel([[0.0]], [1.0], [1.0])


def _paper_setup():
    ss = paper_verbatim_statespace()
    ctl = ControllerConfig(
        pi=PiController(100.0, 150.0), comp=DelayCompensator(100.0, 0.1923)
    )
    sc = Scenario("step-reference", 0.005, start_time=0.1)
    return ss, ctl, sc


class TestConfigs:
    def test_controller_json_round_trip(self):
        ctl = ControllerConfig(
            PiController(100.0, 150.0), DelayCompensator(100.0, 0.1923), 4.04
        )
        assert ControllerConfig.from_json(ctl.to_json()) == ctl

    def test_scenario_json_round_trip(self):
        sc = Scenario(
            "disturbance-step-combo",
            0.005,
            start_time=0.5,
            disturbance_time=16.5,
            disturbance_impulse=-0.05,
        )
        assert Scenario.from_json(sc.to_json()) == sc

    def test_unknown_scenario_kind(self):
        with pytest.raises(ValueError, match="scenario kind"):
            Scenario("ramp", 1.0)

    def test_negative_times_rejected(self):
        with pytest.raises(ValueError):
            Scenario("step-reference", 1.0, start_time=-1.0)

    def test_simconfig_validation(self):
        with pytest.raises(ValueError):
            SimConfig(dt=0.0, duration=1.0)
        with pytest.raises(ValueError):
            SimConfig(dt=0.1, duration=0.01)

    def test_delay_must_be_resolved(self):
        ss, ctl, sc = _paper_setup()
        cfg = SimConfig(dt=0.05, duration=1.0)  # tau / dt < 20
        with pytest.raises(ValueError, match="too coarse"):
            simulate_closed_loop(ss, ctl, sc, cfg)


class TestOpenLoop:
    def test_first_order_step_analytic(self):
        cfg = SimConfig(dt=1e-3, duration=5.0)
        u = np.ones(cfg.nsteps + 1)
        tr = simulate_open_loop(FIRST_ORDER_LAG, u, cfg)
        assert np.max(np.abs(tr.x - (1.0 - np.exp(-tr.t)))) < 1e-8
        assert not tr.diverged

    def test_gravity_offset_added(self):
        cfg = SimConfig(dt=1e-3, duration=0.1)
        u = np.zeros(cfg.nsteps + 1)
        tr = simulate_open_loop(FIRST_ORDER_LAG, u, cfg, gravity_ff=2.0)
        assert np.allclose(tr.u, 2.0)

    def test_divergence_truncates(self):
        unstable = StateSpaceModel([[10.0]], [1.0], [1.0])
        cfg = SimConfig(dt=1e-3, duration=100.0)
        u = np.ones(cfg.nsteps + 1)
        tr = simulate_open_loop(unstable, u, cfg)
        assert tr.diverged
        assert len(tr.t) < cfg.nsteps + 1
        assert np.all(np.isfinite(tr.x))

    def test_signal_length_must_match(self):
        cfg = SimConfig(dt=1e-3, duration=1.0)
        with pytest.raises(ValueError):
            simulate_open_loop(FIRST_ORDER_LAG, np.ones(10), cfg)


class TestClosedLoop:
    def test_p_control_on_integrator_analytic(self):
        # x' = u, u = kp (r - x)  =>  x = r (1 - exp(-kp t))
        ctl = ControllerConfig(PiController(5.0, 0.0), DelayCompensator(0.0, 0.0))
        sc = Scenario("step-reference", 2.0, start_time=0.0)
        cfg = SimConfig(dt=1e-4, duration=3.0)
        tr = simulate_closed_loop(INTEGRATOR, ctl, sc, cfg)
        expected = 2.0 * (1.0 - np.exp(-5.0 * tr.t))
        # ZOH sampling of the control adds O(dt) error on top of RK4.
        assert np.max(np.abs(tr.x - expected)) < 5e-3
        assert tr.x[-1] == pytest.approx(2.0, rel=1e-4)

    def test_control_law_reconstruction(self):
        # The recorded u must equal the sampled two-DOF law recomputed
        # from the recorded trace.
        ss, ctl, sc = _paper_setup()
        cfg = SimConfig(dt=1e-3, duration=2.0)
        tr = simulate_closed_loop(ss, ctl, sc, cfg)
        kp, ki = ctl.pi.kp, ctl.pi.ki
        kd, tau = ctl.comp.kd, ctl.comp.tau
        lag = tau / cfg.dt
        e = tr.r - tr.x
        integ = 0.0
        for i in range(len(tr.t) - 1):
            if i > 0:
                integ += 0.5 * cfg.dt * (e[i - 1] + e[i])
            fidx = i - lag
            if fidx <= 0.0:
                xdel = tr.x[0]
            else:
                i0 = int(fidx)
                frac = fidx - i0
                xdel = tr.x[i0] * (1.0 - frac) + tr.x[i0 + 1] * frac
            expected = kp * e[i] + ki * integ + kd * (tr.x[i] - xdel)
            assert tr.u[i] == pytest.approx(expected, abs=1e-12)

    def test_pre_history_is_constant_initial(self):
        # Until t = tau the delayed term reads the initial output (zero
        # here), so the delay path contributes kd * x exactly.
        ss, ctl, sc = _paper_setup()
        cfg = SimConfig(dt=1e-3, duration=2.0)
        tr = simulate_closed_loop(ss, ctl, sc, cfg)
        i = 5  # well below tau / dt = 192 samples
        e = tr.r - tr.x
        integ = 0.5 * cfg.dt * sum(e[k - 1] + e[k] for k in range(1, i + 1))
        expected = (
            ctl.pi.kp * e[i] + ctl.pi.ki * integ + ctl.comp.kd * (tr.x[i] - tr.x[0])
        )
        assert tr.u[i] == pytest.approx(expected, abs=1e-12)

    def test_disturbance_impulse_applied(self):
        ss, ctl, _ = _paper_setup()
        sc = Scenario(
            "disturbance-step-combo",
            0.0,
            disturbance_time=0.5,
            disturbance_impulse=-0.05,
        )
        cfg = SimConfig(dt=1e-3, duration=2.0)
        tr = simulate_closed_loop(ss, ctl, sc, cfg)
        k = int(round(0.5 / cfg.dt))
        assert np.allclose(tr.x[:k], 0.0)
        assert np.max(np.abs(tr.x[k:])) > 0.0

    def test_open_loop_scenario_rejected(self):
        ss, ctl, _ = _paper_setup()
        sc = Scenario("open-loop-pulse", 1.0, pulse_width=0.1)
        with pytest.raises(ValueError, match="open-loop"):
            simulate_closed_loop(ss, ctl, sc, SimConfig(dt=1e-3, duration=1.0))

    def test_too_many_states_rejected(self):
        n = 17
        ss = StateSpaceModel(-np.eye(n), np.ones(n), np.ones(n))
        ctl = ControllerConfig(PiController(1.0, 0.0), DelayCompensator(0.0, 0.0))
        sc = Scenario("step-reference", 1.0)
        with pytest.raises(ValueError, match="states"):
            simulate_closed_loop(ss, ctl, sc, SimConfig(dt=1e-3, duration=1.0))


class TestBackends:
    def test_backend_is_reported(self):
        assert SIM_BACKEND in ("compiled", "python")

    def test_closed_loop_backends_agree(self):
        ss, ctl, sc = _paper_setup()
        cfg = SimConfig(dt=1e-3, duration=3.0)
        trc = simulate_closed_loop(ss, ctl, sc, cfg, backend="compiled")
        trp = simulate_closed_loop(ss, ctl, sc, cfg, backend="python")
        assert np.max(np.abs(trc.x - trp.x)) < 1e-12
        assert np.max(np.abs(trc.u - trp.u)) < 1e-9

    def test_open_loop_backends_agree(self):
        cfg = SimConfig(dt=1e-3, duration=3.0)
        u = np.sin(np.arange(cfg.nsteps + 1) * cfg.dt * 16.3)
        ss = paper_verbatim_statespace()
        trc = simulate_open_loop(ss, u, cfg, backend="compiled")
        trp = simulate_open_loop(ss, u, cfg, backend="python")
        assert np.max(np.abs(trc.x - trp.x)) < 1e-12


class TestClassifyTrace:
    def _trace(self, t, x, ref, diverged=False):
        z = np.zeros_like(t)
        r = np.full_like(t, ref)
        return SimTrace(t, x, z, z, r, diverged)

    def test_settled(self):
        t = np.linspace(0.0, 10.0, 1001)
        x = 1.0 - np.exp(-2.0 * t)
        v = classify_trace(self._trace(t, x, 1.0), 1.0)
        assert v.verdict == "settled"
        # |x - 1| <= 0.02 from t = ln(50)/2 on.
        assert v.settling_time == pytest.approx(math.log(50.0) / 2.0, abs=0.02)
        assert v.overshoot_fraction == pytest.approx(0.0)

    def test_overshoot_measured(self):
        t = np.linspace(0.0, 20.0, 2001)
        x = 1.0 - np.exp(-t) * np.cos(2.0 * t) - 0.5 * np.exp(-t) * np.sin(2.0 * t)
        v = classify_trace(self._trace(t, x, 1.0), 1.0)
        assert v.verdict == "settled"
        assert v.overshoot_fraction == pytest.approx(np.max(x) - 1.0, rel=1e-9)

    def test_oscillating(self):
        t = np.linspace(0.0, 10.0, 1001)
        x = 1.0 + 0.2 * np.sin(5.0 * t)
        v = classify_trace(self._trace(t, x, 1.0), 1.0)
        assert v.verdict == "oscillating"

    def test_growing_envelope_is_diverged(self):
        t = np.linspace(0.0, 10.0, 1001)
        x = 0.1 * np.exp(0.5 * t) * np.sin(5.0 * t)
        v = classify_trace(self._trace(t, x, 1.0), 1.0)
        assert v.verdict == "diverged"

    def test_truncated_run_is_diverged(self):
        t = np.linspace(0.0, 1.0, 101)
        v = classify_trace(self._trace(t, np.ones_like(t), 1.0, diverged=True), 1.0)
        assert v.verdict == "diverged"

    def test_empty_trace_rejected(self):
        t = np.array([])
        with pytest.raises(ValueError):
            classify_trace(self._trace(t, t, 0.0), 1.0)

    def test_verdict_json_fields(self):
        t = np.linspace(0.0, 10.0, 1001)
        x = 1.0 - np.exp(-2.0 * t)
        v = classify_trace(self._trace(t, x, 1.0), 1.0)
        d = json.loads(v.to_json())
        assert set(d) == {
            "verdict",
            "settling_time_s",
            "overshoot_fraction",
            "peak_u_V",
        }


class TestTraceIO:
    def test_csv_format(self, tmp_path):
        t = np.array([0.0, 0.5])
        tr = SimTrace(t, t + 1, t + 2, t + 3, t + 4)
        path = tmp_path / "trace.csv"
        tr.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "t_s,x_m,y_m,u_V,r_m"
        assert [float(v) for v in lines[2].split(",")] == [0.5, 1.5, 2.5, 3.5, 4.5]
