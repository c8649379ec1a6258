"""Polynomial and LTI system algebra.

Coefficients are stored in descending powers throughout the package.
All types are immutable values; all operations are pure.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Polynomial",
    "RationalTransfer",
    "StateSpaceModel",
    "EvaluationAtPoleError",
    "poly_eval",
    "poly_mul",
    "poly_from_roots",
    "statespace_to_transfer",
    "transfer_eval",
    "system_poles",
    "fourth_order_template",
]

# Relative threshold below which a coefficient counts as numerically zero.
COEFF_PRUNE_RTOL = 1e-12


class EvaluationAtPoleError(ZeroDivisionError):
    """Raised when a rational transfer is evaluated too close to a pole."""


def _trim_leading(coeffs: tuple[float, ...], rtol: float) -> tuple[float, ...]:
    scale = max((abs(c) for c in coeffs), default=0.0)
    if scale == 0.0:
        return (0.0,)
    tol = rtol * scale
    i = 0
    while i < len(coeffs) - 1 and abs(coeffs[i]) <= tol:
        i += 1
    return tuple(coeffs[i:])


@dataclass(frozen=True)
class Polynomial:
    """Real polynomial, coefficients in descending powers.

    The leading coefficient is nonzero unless the polynomial is
    identically zero, so ``degree == len(coeffs) - 1`` always holds.
    """

    coeffs: tuple[float, ...]

    def __init__(self, coeffs, rtol: float = 0.0):
        c = tuple(float(v) for v in coeffs)
        if not c:
            c = (0.0,)
        if rtol > 0.0:
            c = _trim_leading(c, rtol)
        else:
            i = 0
            while i < len(c) - 1 and c[i] == 0.0:
                i += 1
            c = c[i:]
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return all(c == 0.0 for c in self.coeffs)

    def __call__(self, s: complex) -> complex:
        return poly_eval(self, s)


def poly_eval(p: Polynomial, s: complex) -> complex:
    """Evaluate p at s by Horner's scheme."""
    acc = 0.0 + 0.0j
    for c in p.coeffs:
        acc = acc * s + c
    return acc


def poly_mul(a: Polynomial, b: Polynomial) -> Polynomial:
    """Coefficient convolution; deg(ab) = deg(a) + deg(b) for nonzero input."""
    return Polynomial(np.convolve(a.coeffs, b.coeffs))


def poly_from_roots(roots) -> Polynomial:
    """Monic polynomial with the given root multiset."""
    c = np.atleast_1d(np.poly(np.asarray(roots, dtype=complex)))
    if np.max(np.abs(c.imag)) > 1e-9 * max(np.max(np.abs(c)), 1.0):
        raise ValueError("root set is not closed under conjugation")
    return Polynomial(c.real)


@dataclass(frozen=True)
class RationalTransfer:
    """Ratio of two real polynomials N(s)/D(s)."""

    num: Polynomial
    den: Polynomial
    warn_near_cancelation: bool = field(default=True, compare=False)

    def __post_init__(self):
        if self.den.is_zero():
            raise ValueError("denominator is identically zero")
        if self.warn_near_cancelation and self.num.degree >= 1:
            zs = np.roots(self.num.coeffs)
            ps = np.roots(self.den.coeffs)
            for z in zs:
                if ps.size and np.min(np.abs(ps - z)) < 1e-6:
                    warnings.warn(
                        "numerator root within 1e-6 of a denominator root; "
                        "near pole-zero cancelation is not performed "
                        "automatically",
                        stacklevel=3,
                    )
                    break

    def __call__(self, s: complex) -> complex:
        return transfer_eval(self, s)

    def to_json(self) -> str:
        return json.dumps({"num": list(self.num.coeffs), "den": list(self.den.coeffs)})

    @classmethod
    def from_json(cls, text: str) -> "RationalTransfer":
        d = json.loads(text)
        return cls(Polynomial(d["num"]), Polynomial(d["den"]))


@dataclass(frozen=True)
class StateSpaceModel:
    """SISO state-space triple (A, B, F): G(s) = F (sI - A)^-1 B."""

    A: np.ndarray
    B: np.ndarray
    F: np.ndarray

    def __init__(self, A, B, F):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        B = np.asarray(B, dtype=float).reshape(-1)
        F = np.asarray(F, dtype=float).reshape(-1)
        n = A.shape[0]
        if A.shape != (n, n):
            raise ValueError(f"A must be square, got {A.shape}")
        if B.shape != (n,) or F.shape != (n,):
            raise ValueError(
                f"B and F must have length {n}, got {B.shape}, {F.shape}"
            )
        A.setflags(write=False)
        B.setflags(write=False)
        F.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "F", F)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def to_json(self) -> str:
        return json.dumps(
            {"A": self.A.tolist(), "B": self.B.tolist(), "F": self.F.tolist()}
        )

    @classmethod
    def from_json(cls, text: str) -> "StateSpaceModel":
        d = json.loads(text)
        return cls(d["A"], d["B"], d["F"])


def statespace_to_transfer(
    m: StateSpaceModel, prune_rtol: float = COEFF_PRUNE_RTOL
) -> RationalTransfer:
    """Convert (A, B, F) to N(s)/D(s) by the Faddeev-LeVerrier recursion.

    D(s) is the characteristic polynomial of A; near-zero leading
    coefficients of N are pruned below ``prune_rtol * max |coeff|``.
    """
    n = m.n
    A, B, F = m.A, m.B, m.F
    M = np.eye(n)
    den = [1.0]
    num = [float(F @ M @ B)]
    for k in range(1, n + 1):
        AM = A @ M
        ck = -np.trace(AM) / k
        den.append(float(ck))
        M = AM + ck * np.eye(n)
        if k < n:
            num.append(float(F @ M @ B))
    return RationalTransfer(Polynomial(num, rtol=prune_rtol), Polynomial(den))


def transfer_eval(
    g: RationalTransfer, s: complex, pole_rtol: float = 1e-9
) -> complex:
    """Evaluate N(s)/D(s); raises EvaluationAtPoleError near a pole.

    The pole guard compares |D(s)| against ``pole_rtol`` times the
    denominator coefficient scale grown with |s|, so it fires at s = 0
    for plants with a free integrator but not at regular points.
    """
    d = poly_eval(g.den, s)
    scale = max(abs(c) for c in g.den.coeffs) * max(1.0, abs(s)) ** g.den.degree
    if abs(d) <= pole_rtol * scale:
        raise EvaluationAtPoleError(f"denominator ~ 0 at s = {s!r}")
    return poly_eval(g.num, s) / d


def system_poles(g: RationalTransfer) -> list[complex]:
    """Denominator roots with multiplicity, via companion-matrix eigenvalues.

    Sorted by real part, then imaginary part.
    """
    if g.den.is_zero():
        raise ValueError("denominator is identically zero")
    if g.den.degree < 1:
        return []
    roots = np.roots(g.den.coeffs)
    return sorted((complex(r) for r in roots), key=lambda z: (z.real, z.imag))


def fourth_order_template(
    k: float, z1: float, p1: float, zeta: float, omega0: float
) -> RationalTransfer:
    """Oscillatory plant k (s + z1) / [s (s + p1) (s^2 + 2 zeta w0 s + w0^2)].

    Requires k, z1, p1, omega0 > 0, 0 < zeta < 1 and z1 > omega0 (plant
    class with the zero above the resonance). Denominator is returned
    expanded.
    """
    if min(k, z1, p1, omega0) <= 0:
        raise ValueError("k, z1, p1 and omega0 must be strictly positive")
    if not 0 < zeta < 1:
        raise ValueError("damping ratio must satisfy 0 < zeta < 1")
    if z1 <= omega0:
        raise ValueError(f"parameter ordering violated: z1={z1} <= omega0={omega0}")
    num = Polynomial([k, k * z1])
    den = poly_mul(
        poly_mul(Polynomial([1.0, 0.0]), Polynomial([1.0, p1])),
        Polynomial([1.0, 2.0 * zeta * omega0, omega0 * omega0]),
    )
    return RationalTransfer(num, den)
