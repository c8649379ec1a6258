"""Frequency-response sampling, phase unwrapping, stability margins.

Any callable s -> complex can be sampled, which covers rational
transfers, pure delays and quasi-rational loop products.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

__all__ = [
    "FrequencyGrid",
    "ResponseSet",
    "MarginReport",
    "PoleOnGridError",
    "UnwrapAmbiguityError",
    "default_grid",
    "sample_response",
    "stability_margins",
    "resonance_peak",
]

DEFAULT_GRID_POINTS = 2000
GRID_POINTS_ENV = "RSHAPER_GRID_POINTS"


class PoleOnGridError(ArithmeticError):
    """A grid point coincides (numerically) with a pole of the system."""


class UnwrapAmbiguityError(ArithmeticError):
    """Adjacent raw phase samples jump by >= 180 deg; densify the grid."""


@dataclass(frozen=True)
class FrequencyGrid:
    omega_min: float
    omega_max: float
    points: int = DEFAULT_GRID_POINTS
    spacing: str = "logarithmic"

    def __post_init__(self):
        if not 0 < self.omega_min < self.omega_max:
            raise ValueError("need 0 < omega_min < omega_max")
        if self.points < 2:
            raise ValueError("need at least 2 grid points")
        if self.spacing not in ("logarithmic", "linear"):
            raise ValueError(f"unknown spacing {self.spacing!r}")

    def omegas(self) -> np.ndarray:
        if self.spacing == "logarithmic":
            return np.logspace(
                math.log10(self.omega_min), math.log10(self.omega_max), self.points
            )
        return np.linspace(self.omega_min, self.omega_max, self.points)


def default_grid() -> FrequencyGrid:
    """Log grid on [0.1, 1000] rad/s; point count overridable via env."""
    pts = int(os.environ.get(GRID_POINTS_ENV, DEFAULT_GRID_POINTS))
    return FrequencyGrid(0.1, 1000.0, pts)


@dataclass(frozen=True)
class ResponseSet:
    """Sampled frequency response with unwrapped, continuous phase."""

    omega: np.ndarray
    magnitude_db: np.ndarray
    phase_deg: np.ndarray

    def __post_init__(self):
        if not (len(self.omega) == len(self.magnitude_db) == len(self.phase_deg)):
            raise ValueError("omega, magnitude and phase must have equal length")
        if np.any(np.diff(self.omega) <= 0):
            raise ValueError("omega must be strictly increasing")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("omega_rad_s,magnitude_db,phase_deg\n")
            for w, m, p in zip(self.omega, self.magnitude_db, self.phase_deg):
                fh.write(f"{w:.17g},{m:.17g},{p:.17g}\n")


@dataclass(frozen=True)
class MarginReport:
    gain_margin_db: float  # +inf when no +-180 deg crossing exists
    phase_margin_deg: float | None
    gain_crossover: float | None
    phase_crossovers: tuple[float, ...]
    stable_verdict: str  # margins-positive | margins-violated | no-crossover

    def to_json(self) -> str:
        gm = self.gain_margin_db
        return json.dumps(
            {
                "gain_margin_db": gm if math.isfinite(gm) else "inf",
                "phase_margin_deg": self.phase_margin_deg,
                "gain_crossover_rad_s": self.gain_crossover,
                "phase_crossovers_rad_s": list(self.phase_crossovers),
                "stable_verdict": self.stable_verdict,
            }
        )


def sample_response(system, grid: FrequencyGrid) -> ResponseSet:
    """Sample system(j w) over the grid.

    Magnitude in dB, phase unwrapped starting from the principal value at
    omega_min. Raises PoleOnGridError for nonfinite/zero samples and
    UnwrapAmbiguityError when adjacent raw phases are 180 deg apart.
    """
    w = grid.omegas()
    try:
        h = np.asarray([complex(system(1j * wi)) for wi in w])
    except ZeroDivisionError as exc:  # includes EvaluationAtPoleError
        raise PoleOnGridError(str(exc)) from exc
    mag = np.abs(h)
    if np.any(~np.isfinite(h)) or np.any(mag == 0.0):
        bad = w[~np.isfinite(h) | (mag == 0.0)][0]
        raise PoleOnGridError(f"system not evaluatable at omega = {bad}")
    raw = np.angle(h)
    step = np.abs(np.mod(np.diff(raw) + np.pi, 2.0 * np.pi) - np.pi)
    if np.any(step >= np.pi * (1.0 - 1e-12)):
        bad = w[1:][step >= np.pi * (1.0 - 1e-12)][0]
        raise UnwrapAmbiguityError(
            f"raw phase jumps by >= 180 deg near omega = {bad}; densify the grid"
        )
    phase = np.degrees(np.unwrap(raw))
    return ResponseSet(w, 20.0 * np.log10(mag), phase)


def _interp_log(w0: float, w1: float, y0: float, y1: float, ytarget: float) -> float:
    """Frequency at which the (log w, y) segment hits ytarget."""
    t = (ytarget - y0) / (y1 - y0)
    return 10.0 ** (math.log10(w0) + t * (math.log10(w1) - math.log10(w0)))


def _value_at(w: np.ndarray, y: np.ndarray, wq: float) -> float:
    """Linear interpolation of y in log-frequency at wq."""
    lw = np.log10(w)
    return float(np.interp(math.log10(wq), lw, y))


def stability_margins(r: ResponseSet) -> MarginReport:
    """Extract gain/phase margins from a sampled loop response.

    Gain crossover: first frequency where the magnitude falls through
    0 dB (linear interpolation in log-frequency). Phase crossovers: every
    crossing of a +-180 + k*360 deg level. GM is minus the magnitude at
    the first phase crossover; PM is 180 deg plus the phase at the gain
    crossover.
    """
    w, mag, ph = r.omega, r.magnitude_db, r.phase_deg

    gain_crossover = None
    phase_margin = None
    for i in range(len(w) - 1):
        if mag[i] > 0.0 >= mag[i + 1]:
            gain_crossover = _interp_log(w[i], w[i + 1], mag[i], mag[i + 1], 0.0)
            t = mag[i] / (mag[i] - mag[i + 1])
            phase_margin = 180.0 + ph[i] + t * (ph[i + 1] - ph[i])
            break

    # The +-180 + k*360 levels collapse to the single family 180 + k*360.
    lo, hi = float(ph.min()), float(ph.max())
    levels = []
    k = math.floor((lo - 180.0) / 360.0)
    while 180.0 + 360.0 * k <= hi:
        lv = 180.0 + 360.0 * k
        if lo <= lv <= hi:
            levels.append(lv)
        k += 1
    crossings = []
    for i in range(len(w) - 1):
        for lv in levels:
            d0, d1 = ph[i] - lv, ph[i + 1] - lv
            if d0 == 0.0 and i == 0:
                crossings.append(float(w[i]))
            elif d0 * d1 < 0.0 or (d1 == 0.0 and d0 != 0.0):
                crossings.append(_interp_log(w[i], w[i + 1], ph[i], ph[i + 1], lv))
    crossings.sort()

    if crossings:
        gain_margin = -_value_at(w, mag, crossings[0])
    else:
        gain_margin = math.inf

    if gain_crossover is None:
        verdict = "no-crossover"
    elif phase_margin > 0.0 and gain_margin > 0.0:
        verdict = "margins-positive"
    else:
        verdict = "margins-violated"
    return MarginReport(
        gain_margin_db=gain_margin,
        phase_margin_deg=phase_margin,
        gain_crossover=gain_crossover,
        phase_crossovers=tuple(crossings),
        stable_verdict=verdict,
    )


def resonance_peak(r: ResponseSet) -> tuple[float, float] | None:
    """Highest interior local maximum of the magnitude, or None."""
    mag = r.magnitude_db
    best = None
    for i in range(1, len(mag) - 1):
        if mag[i] > mag[i - 1] and mag[i] > mag[i + 1]:
            if best is None or mag[i] > best[1]:
                best = (float(r.omega[i]), float(mag[i]))
    return best
