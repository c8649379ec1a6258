"""Concrete plants: the two-mass oscillator with voice-coil actuation.

Two constructors are provided: a physical one from the parameter table
and a verbatim copy of the published state-space matrix. The printed
matrix entries 0.033 / 0.027 correspond to roughly twice the tabulated
spring damping, so the two disagree slightly on the cross-damping terms;
the verbatim model is the authority for number reproduction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict

import numpy as np

from .lti import StateSpaceModel

__all__ = [
    "TwoMassParams",
    "nominal_params",
    "two_mass_statespace",
    "paper_verbatim_statespace",
    "gravity_feedforward",
]


@dataclass(frozen=True)
class TwoMassParams:
    """Physical parameters of the two-mass oscillator rig (SI units)."""

    m1: float  # actuator mass, kg
    m2: float  # load mass, kg
    k_spring: float  # N/m
    sigma: float  # actuator damping, kg/s
    delta: float  # spring damping, kg/s
    r_coil: float  # coil resistance, V/A
    psi: float  # EMF constant, Vs/m
    g: float  # gravity, m/s^2

    def __post_init__(self):
        for name, value in asdict(self).items():
            if value <= 0:
                raise ValueError(f"{name} must be strictly positive, got {value}")

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    @classmethod
    def from_json(cls, text: str) -> "TwoMassParams":
        return cls(**json.loads(text))


def nominal_params() -> TwoMassParams:
    """Nominal rig parameters."""
    return TwoMassParams(
        m1=0.6,
        m2=0.75,
        k_spring=200.0,
        sigma=200.0,
        delta=0.01,
        r_coil=5.23,
        psi=17.16,
        g=9.81,
    )


def two_mass_statespace(p: TwoMassParams) -> StateSpaceModel:
    """State-space model for state order z = (y', y, x', x).

    y is the actuator position, x the (non-collocated) load position;
    input is the coil voltage.
    """
    m1, m2, k, s, d = p.m1, p.m2, p.k_spring, p.sigma, p.delta
    A = np.array(
        [
            [-(s + d) / m1, -k / m1, d / m1, k / m1],
            [1.0, 0.0, 0.0, 0.0],
            [d / m2, k / m2, -d / m2, -k / m2],
            [0.0, 0.0, 1.0, 0.0],
        ]
    )
    B = np.array([p.psi / (p.r_coil * m1), 0.0, 0.0, 0.0])
    F = np.array([0.0, 0.0, 0.0, 1.0])
    return StateSpaceModel(A, B, F)


def paper_verbatim_statespace() -> StateSpaceModel:
    """The published two-mass model, exactly as printed."""
    A = np.array(
        [
            [-333.4, -333.3, 0.033, 333.3],
            [1.0, 0.0, 0.0, 0.0],
            [0.027, 266.7, -0.027, -266.7],
            [0.0, 0.0, 1.0, 0.0],
        ]
    )
    B = np.array([5.47, 0.0, 0.0, 0.0])
    F = np.array([0.0, 0.0, 0.0, 1.0])
    return StateSpaceModel(A, B, F)


def gravity_feedforward(p: TwoMassParams) -> float:
    """Constant input voltage canceling the static weight of both masses."""
    return p.r_coil * p.g / p.psi * (p.m1 + p.m2)
