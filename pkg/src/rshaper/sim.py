"""Deterministic fixed-step simulation of the delay-differential closed loop.

Plant: linear state-space ODE integrated by classical RK4. Controller:
sampled two-degrees-of-freedom law

    u(t) = kp e(t) + ki * trapz(e) + kd (x(t) - x(t - tau)) + u_g,
    e = r - x,

held constant over each step (zero-order hold). The delayed output is
read from the recorded output history with linear interpolation; the
pre-history is constant at the initial output.

The hot inner loops live in a compiled extension (rshaper._simcore) with
a pure-Python fallback selected at import time.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .design import DelayCompensator, PiController
from .lti import StateSpaceModel

try:
    from . import _simcore as _kernel

    SIM_BACKEND = "compiled"
except ImportError:  # extension not built; fall back to pure Python
    from . import _simcore_py as _kernel

    SIM_BACKEND = "python"

from . import _simcore_py

__all__ = [
    "ControllerConfig",
    "Scenario",
    "SimConfig",
    "SimTrace",
    "TraceVerdict",
    "SIM_BACKEND",
    "simulate_closed_loop",
    "simulate_open_loop",
    "classify_trace",
]

SCENARIO_KINDS = ("step-reference", "open-loop-pulse", "disturbance-step-combo")
MAX_STATES = 16  # compiled kernel uses fixed-size scratch

# Delay must be resolved by at least this many samples.
MIN_DELAY_SAMPLES = 20


@dataclass(frozen=True)
class ControllerConfig:
    pi: PiController
    comp: DelayCompensator  # kd = 0 disables the delay path
    gravity_ff: float = 0.0

    def to_json(self) -> str:
        return json.dumps(
            {
                "pi": {"kp": self.pi.kp, "ki": self.pi.ki},
                "comp": {"kd": self.comp.kd, "tau": self.comp.tau},
                "gravity_ff": self.gravity_ff,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "ControllerConfig":
        d = json.loads(text)
        return cls(
            pi=PiController(d["pi"]["kp"], d["pi"]["ki"]),
            comp=DelayCompensator(d["comp"]["kd"], d["comp"].get("tau", 0.0)),
            gravity_ff=d.get("gravity_ff", 0.0),
        )


@dataclass(frozen=True)
class Scenario:
    kind: str
    amplitude: float
    start_time: float = 0.0
    pulse_width: float = 0.0
    disturbance_time: float = 0.0
    disturbance_impulse: float = 0.0

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if min(self.start_time, self.pulse_width, self.disturbance_time) < 0:
            raise ValueError("scenario times must be nonnegative")

    def to_json(self) -> str:
        return json.dumps(self.__dict__)

    @classmethod
    def from_json(cls, text: str) -> "Scenario":
        return cls(**json.loads(text))


@dataclass(frozen=True)
class SimConfig:
    dt: float
    duration: float
    history_policy: str = "constant-initial"

    def __post_init__(self):
        if self.dt <= 0 or self.duration < self.dt:
            raise ValueError("need dt > 0 and duration >= dt")
        if self.history_policy != "constant-initial":
            raise ValueError(f"unknown history policy {self.history_policy!r}")

    @property
    def nsteps(self) -> int:
        return int(round(self.duration / self.dt))


@dataclass(frozen=True)
class SimTrace:
    t: np.ndarray
    x: np.ndarray  # load position (plant output)
    y: np.ndarray  # actuator position (state 2)
    u: np.ndarray  # control voltage
    r: np.ndarray  # reference
    diverged: bool = False

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("t_s,x_m,y_m,u_V,r_m\n")
            for row in zip(self.t, self.x, self.y, self.u, self.r):
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


@dataclass(frozen=True)
class TraceVerdict:
    verdict: str  # settled | oscillating | diverged
    settling_time: float | None
    overshoot_fraction: float | None
    peak_u: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "verdict": self.verdict,
                "settling_time_s": self.settling_time,
                "overshoot_fraction": self.overshoot_fraction,
                "peak_u_V": self.peak_u,
            }
        )


def _check_plant(plant: StateSpaceModel) -> None:
    if plant.n > MAX_STATES:
        raise ValueError(f"at most {MAX_STATES} states supported, got {plant.n}")


def _validate_delay(cfg: SimConfig, comp: DelayCompensator) -> None:
    if comp.kd != 0.0 and cfg.dt > comp.tau / MIN_DELAY_SAMPLES:
        raise ValueError(
            f"dt={cfg.dt} too coarse for tau={comp.tau}; need dt <= tau/"
            f"{MIN_DELAY_SAMPLES}"
        )


def simulate_closed_loop(
    plant: StateSpaceModel,
    ctl: ControllerConfig,
    sc: Scenario,
    cfg: SimConfig,
    backend=None,
) -> SimTrace:
    """Run the closed loop from rest; see the module docstring for the law.

    The disturbance of the combo scenario is a velocity impulse applied
    to the third state (the load velocity for the two-mass plant) at the
    disturbance time.
    """
    _check_plant(plant)
    _validate_delay(cfg, ctl.comp)
    if sc.kind == "open-loop-pulse":
        raise ValueError("open-loop-pulse scenarios use simulate_open_loop")
    n = cfg.nsteps
    if not 0 <= sc.start_time <= cfg.duration:
        raise ValueError("start_time outside the simulation horizon")
    t = np.arange(n + 1) * cfg.dt
    r = np.where(t >= sc.start_time, sc.amplitude, 0.0)
    dist_step = -1
    dist_impulse = 0.0
    if sc.kind == "disturbance-step-combo":
        if not 0 <= sc.disturbance_time <= cfg.duration:
            raise ValueError("disturbance_time outside the simulation horizon")
        dist_step = int(round(sc.disturbance_time / cfg.dt))
        dist_impulse = sc.disturbance_impulse
    kern = _simcore_py if backend == "python" else _kernel
    x, y, u, steps = kern.run_closed_loop(
        np.array(plant.A, dtype=float, order="C"),
        np.array(plant.B, dtype=float, order="C"),
        np.array(plant.F, dtype=float, order="C"),
        ctl.pi.kp,
        ctl.pi.ki,
        ctl.comp.kd,
        ctl.comp.tau,
        ctl.gravity_ff,
        r,
        cfg.dt,
        dist_step,
        dist_impulse,
        min(2, plant.n - 1),
    )
    diverged = steps < n
    end = steps + 1
    return SimTrace(t[:end], x[:end], y[:end], u[:end], r[:end], diverged)


def simulate_open_loop(
    plant: StateSpaceModel,
    u_signal,
    cfg: SimConfig,
    gravity_ff: float = 0.0,
    backend=None,
) -> SimTrace:
    """Drive the plant directly with a sampled input signal."""
    _check_plant(plant)
    n = cfg.nsteps
    u_in = np.array(u_signal, dtype=float, order="C")
    if len(u_in) < n + 1:
        raise ValueError(
            f"input signal too short: {len(u_in)} samples < {n + 1}"
        )
    u_in = np.ascontiguousarray(u_in[: n + 1])
    kern = _simcore_py if backend == "python" else _kernel
    x, y, u, steps = kern.run_open_loop(
        np.array(plant.A, dtype=float, order="C"),
        np.array(plant.B, dtype=float, order="C"),
        np.array(plant.F, dtype=float, order="C"),
        u_in,
        gravity_ff,
        cfg.dt,
    )
    t = np.arange(n + 1) * cfg.dt
    diverged = steps < n
    end = steps + 1
    return SimTrace(
        t[:end], x[:end], y[:end], u[:end], np.zeros(end), diverged
    )


def classify_trace(
    tr: SimTrace, ref: float, settle_band: float = 0.02
) -> TraceVerdict:
    """Quantify a run: settled within the band, still oscillating, or
    diverged (truncated run or error envelope growing by >= 2x).
    """
    if len(tr.t) == 0:
        raise ValueError("empty trace")
    err = np.abs(tr.x - ref)
    n = len(err)
    peak_u = float(np.max(np.abs(tr.u)))
    head = float(np.max(err[: max(1, n // 5)]))
    tail = float(np.max(err[-max(1, n // 5):]))
    if tr.diverged or (head > 0 and tail >= 2.0 * head):
        return TraceVerdict("diverged", None, None, peak_u)
    band = settle_band * abs(ref)
    final = err[-max(1, n // 10):]
    if np.max(final) <= band or (ref == 0.0 and np.max(final) == 0.0):
        inside = err <= band if ref != 0.0 else err == 0.0
        k = n - 1
        while k > 0 and inside[k - 1]:
            k -= 1
        settling = float(tr.t[k]) if not inside.all() or k > 0 else 0.0
        overshoot = None
        if ref != 0.0:
            signed = (tr.x - tr.x[0]) / (ref - tr.x[0]) if ref != tr.x[0] else tr.x * 0
            overshoot = float(max(np.max(signed) - 1.0, 0.0))
        return TraceVerdict("settled", settling, overshoot, peak_u)
    return TraceVerdict("oscillating", None, None, peak_u)
