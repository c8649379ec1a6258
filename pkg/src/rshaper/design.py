"""Time-delay compensator: construction, design rules, loop composition.

The compensator R(s) = kd (exp(-s tau) - 1) feeds the delayed-difference
of the measured output back positively in the time domain, which places
D(s) + R(s) N(s) in the closed-loop denominator.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass

import numpy as np

from .lti import Polynomial, RationalTransfer, poly_eval, system_poles, transfer_eval

__all__ = [
    "DelayCompensator",
    "PiController",
    "QuasiRationalLoop",
    "compensator_eval",
    "design_tau",
    "design_kd",
    "closed_loop_eval",
    "pi_series_eval",
    "suppression_ratio",
    "extract_template_params",
    "design_report",
    "REFERENCE_DAMPING",
]

# Damping ratio of the well-damped reference response the gain rule aims at.
REFERENCE_DAMPING = 0.7


@dataclass(frozen=True)
class DelayCompensator:
    """Delayed-difference output compensator with gain kd and delay tau."""

    kd: float
    tau: float

    def __post_init__(self):
        if self.kd < 0:
            raise ValueError("kd must be nonnegative")
        if self.kd > 0 and self.tau <= 0:
            raise ValueError("tau must be positive when kd > 0")

    def __call__(self, s: complex) -> complex:
        return compensator_eval(self, s)

    def to_json(self) -> str:
        return json.dumps({"kd": self.kd, "tau": self.tau})

    @classmethod
    def from_json(cls, text: str) -> "DelayCompensator":
        d = json.loads(text)
        return cls(d["kd"], d["tau"])


@dataclass(frozen=True)
class PiController:
    kp: float
    ki: float

    def __post_init__(self):
        if self.kp <= 0 or self.ki < 0:
            raise ValueError("need kp > 0 and ki >= 0")

    def to_json(self) -> str:
        return json.dumps({"kp": self.kp, "ki": self.ki})

    @classmethod
    def from_json(cls, text: str) -> "PiController":
        d = json.loads(text)
        return cls(d["kp"], d["ki"])


def compensator_eval(r: DelayCompensator, s: complex) -> complex:
    """R(s) = kd (exp(-s tau) - 1); zero at s = 0, |R(jw)| <= 2 kd."""
    return r.kd * (cmath.exp(-s * r.tau) - 1.0)


@dataclass(frozen=True)
class QuasiRationalLoop:
    """Plant N/D, optionally closed over the delay compensator, optionally
    in series with a PI controller.

    Callable: returns the open-loop transfer used for margin analysis,
    i.e. C(s) * N(s) / (D(s) + R(s) N(s)) with both present.
    """

    plant_num: Polynomial
    plant_den: Polynomial
    compensator: DelayCompensator | None = None
    pi: PiController | None = None

    def __call__(self, s: complex) -> complex:
        h = closed_loop_eval(self, s)
        if self.pi is None:
            return h
        return _pi_factor(self.pi, s) * h


def _pi_factor(c: PiController, s: complex) -> complex:
    if s == 0:
        raise ZeroDivisionError("PI controller is not evaluatable at s = 0")
    return c.kp * (s + c.ki / c.kp) / s


def closed_loop_eval(loop: QuasiRationalLoop, s: complex) -> complex:
    """H(s) = N(s) / (D(s) + R(s) N(s)); reduces to N/D without compensator."""
    n = poly_eval(loop.plant_num, s)
    d = poly_eval(loop.plant_den, s)
    if loop.compensator is not None and loop.compensator.kd > 0:
        d = d + compensator_eval(loop.compensator, s) * n
    scale = max(abs(c) for c in loop.plant_den.coeffs)
    scale *= max(1.0, abs(s)) ** loop.plant_den.degree
    if abs(d) <= 1e-12 * scale:
        raise ZeroDivisionError(f"closed-loop denominator ~ 0 at s = {s!r}")
    return n / d


def pi_series_eval(c: PiController, inner, s: complex) -> complex:
    """kp (s + ki/kp)/s times inner(s)."""
    return _pi_factor(c, s) * inner(s)


def suppression_ratio(
    g: RationalTransfer, r: DelayCompensator, omega: float
) -> float:
    """|1 + R(jw) N(jw) / D(jw)| = |G(jw)| / |H(jw)|."""
    s = 1j * omega
    n = poly_eval(g.num, s)
    d = poly_eval(g.den, s)
    if d == 0:
        raise ZeroDivisionError(f"plant denominator is zero at omega = {omega}")
    return abs(1.0 + compensator_eval(r, s) * n / d)


def design_tau(
    g: RationalTransfer,
    omega0: float,
    phase_points: int = 2000,
    track_decades: float = 4.0,
) -> float:
    """Delay so that the compensator difference spans the plant phase lag
    at the resonance frequency: tau = -arg G(j w0) / w0.

    The argument is the continuous phase tracked from low frequency
    upward (the plant class starts at -90 deg and reaches anti-phase,
    about -180 deg, at w0), not the principal value.
    """
    if omega0 <= 0:
        raise ValueError("omega0 must be positive")
    w = np.logspace(
        math.log10(omega0) - track_decades, math.log10(omega0), phase_points
    )
    raw = np.unwrap([cmath.phase(transfer_eval(g, 1j * wi)) for wi in w])
    tau = -raw[-1] / omega0
    if tau <= 0:
        raise ValueError(
            "plant phase at omega0 is nonnegative; the anti-phase assumption "
            "does not hold for this plant"
        )
    return float(tau)


def design_kd(
    k: float,
    z1: float,
    p1: float,
    zeta: float,
    omega0: float,
    reference_damping: float = REFERENCE_DAMPING,
) -> float:
    """Compensator gain that flattens the resonance peak down to the
    well-damped reference response:

        kd = w0^3 (zeta_ref - zeta) / k * |(p1 + j w0) / (z1 + j w0)|
    """
    if min(k, z1, p1, omega0) <= 0 or not 0 < zeta < 1:
        raise ValueError("invalid plant template parameters")
    if zeta > reference_damping * (1.0 + 1e-12):
        raise ValueError(
            f"zeta={zeta} exceeds the reference damping {reference_damping}; "
            "the gain rule would be negative"
        )
    ratio = abs((p1 + 1j * omega0) / (z1 + 1j * omega0))
    return max(omega0**3 * (reference_damping - zeta) / k, 0.0) * ratio


def extract_template_params(g: RationalTransfer) -> dict:
    """Recover (k, z1, p1, zeta, omega0) from a plant of the oscillatory
    template class: one zero, one pole near the origin, one fast real
    pole and one lightly damped complex pair.
    """
    lead = g.den.coeffs[0]
    num = [c / lead for c in g.num.coeffs]
    if len(num) != 2:
        raise ValueError("plant numerator is not first order")
    k = num[0]
    z1 = num[1] / num[0]
    poles = system_poles(g)
    cplx = [p for p in poles if p.imag > 1e-9]
    if not cplx:
        raise ValueError("no complex pole pair found")
    pair = max(cplx, key=lambda p: p.imag)
    omega0 = abs(pair.imag)
    zeta = -pair.real / abs(pair)
    real_poles = sorted(p.real for p in poles if abs(p.imag) <= 1e-9)
    if not real_poles:
        raise ValueError("no real pole found")
    p1 = -real_poles[0]  # fastest (most negative) real pole
    return {"k": k, "z1": z1, "p1": p1, "zeta": zeta, "omega0": omega0}


def design_report(g: RationalTransfer, omega0: float | None = None) -> dict:
    """Full design summary: resonance frequency, delay, gain rule value
    and the targeted peak-suppression ratio.

    Plants outside the oscillatory template class are accepted when
    omega0 is given explicitly; the gain fields are then None.
    """
    try:
        params = extract_template_params(g)
    except ValueError:
        if omega0 is None:
            raise
        params = None
    if omega0 is None:
        omega0 = params["omega0"]
    tau = design_tau(g, omega0)
    kd = target = None
    if params is not None:
        kd = design_kd(
            params["k"], params["z1"], params["p1"], params["zeta"], omega0
        )
        target = REFERENCE_DAMPING / params["zeta"]
    return {
        "omega0": omega0,
        "tau": tau,
        "kd": kd,
        "target_ratio": target,
    }
