"""Polynomial and rational-transfer algebra."""

import json
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rshaper.lti import (
    EvaluationAtPoleError,
    Polynomial,
    RationalTransfer,
    StateSpaceModel,
    fourth_order_template,
    poly_eval,
    poly_from_roots,
    poly_mul,
    statespace_to_transfer,
    system_poles,
    transfer_eval,
)
from rshaper.plants import paper_verbatim_statespace

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


class TestPolynomial:
    def test_trims_leading_zeros(self):
        p = Polynomial((0.0, 0.0, 2.0, 1.0))
        assert p.coeffs == (2.0, 1.0)
        assert p.degree == 1

    def test_empty_is_zero(self):
        assert Polynomial(()).is_zero()
        assert Polynomial((0.0, 0.0)).coeffs == (0.0,)

    def test_relative_trim(self):
        p = Polynomial((1e-15, 1.0, 2.0), rtol=1e-12)
        assert p.coeffs == (1.0, 2.0)

    def test_eval_matches_numpy(self):
        c = (3.0, -2.0, 0.5, 7.0)
        p = Polynomial(c)
        for s in (0.0, 1.5, -2.0, 1j, 2 - 3j):
            assert poly_eval(p, s) == pytest.approx(np.polyval(c, s))

    @given(
        a=st.lists(finite, min_size=1, max_size=5),
        b=st.lists(finite, min_size=1, max_size=5),
        x=st.floats(min_value=-10, max_value=10, allow_nan=False),
    )
    @settings(max_examples=60, deadline=None)
    def test_mul_is_pointwise_product(self, a, b, x):
        pa, pb = Polynomial(a), Polynomial(b)
        prod = poly_mul(pa, pb)
        lhs = poly_eval(prod, x)
        rhs = poly_eval(pa, x) * poly_eval(pb, x)
        scale = max(abs(lhs), abs(rhs), 1.0)
        assert abs(lhs - rhs) <= 1e-9 * scale

    def test_from_roots(self):
        p = poly_from_roots([-1.0, -2.0])
        assert p.coeffs == pytest.approx((1.0, 3.0, 2.0))

    def test_from_roots_conjugate_pair(self):
        p = poly_from_roots([-1 + 2j, -1 - 2j])
        assert p.coeffs == pytest.approx((1.0, 2.0, 5.0))

    def test_from_roots_rejects_unpaired_complex(self):
        with pytest.raises(ValueError):
            poly_from_roots([1j, 2j])


class TestRationalTransfer:
    def test_json_round_trip(self):
        g = RationalTransfer(Polynomial((2.0, 1.0)), Polynomial((1.0, 3.0, 2.0)))
        g2 = RationalTransfer.from_json(g.to_json())
        assert g2.num.coeffs == g.num.coeffs
        assert g2.den.coeffs == g.den.coeffs

    def test_zero_denominator_rejected(self):
        with pytest.raises(ValueError):
            RationalTransfer(Polynomial((1.0,)), Polynomial((0.0,)))

    def test_near_cancelation_warns(self):
        with pytest.warns(UserWarning, match="cancelation"):
            RationalTransfer(
                Polynomial((1.0, 1.0)), Polynomial((1.0, 2.0 + 1e-9, 1.0 + 1e-9))
            )

    def test_clean_system_does_not_warn(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            RationalTransfer(Polynomial((1.0, 1.0)), Polynomial((1.0, 5.0, 6.0)))

    def test_eval_at_pole_raises(self):
        g = RationalTransfer(Polynomial((1.0,)), Polynomial((1.0, 0.0)))
        with pytest.raises(EvaluationAtPoleError):
            transfer_eval(g, 0.0)

    def test_eval_regular_point(self):
        g = RationalTransfer(Polynomial((1.0,)), Polynomial((1.0, 0.0)))
        assert transfer_eval(g, 2j) == pytest.approx(-0.5j)


class TestStateSpace:
    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            StateSpaceModel([[0.0, 1.0], [0.0, 0.0]], [1.0], [1.0, 0.0])

    def test_json_round_trip(self):
        ss = StateSpaceModel([[0.0, 1.0], [-2.0, -3.0]], [0.0, 1.0], [1.0, 0.0])
        ss2 = StateSpaceModel.from_json(ss.to_json())
        assert np.allclose(ss2.A, ss.A)
        assert np.allclose(ss2.B, ss.B)
        assert np.allclose(ss2.F, ss.F)

    def test_second_order_conversion(self):
        # x'' + 3 x' + 2 x = u, output x  =>  G = 1 / (s^2 + 3 s + 2)
        ss = StateSpaceModel([[0.0, 1.0], [-2.0, -3.0]], [0.0, 1.0], [1.0, 0.0])
        g = statespace_to_transfer(ss)
        assert g.num.coeffs == pytest.approx((1.0,))
        assert g.den.coeffs == pytest.approx((1.0, 3.0, 2.0))

    def test_conversion_with_numerator_dynamics(self):
        # Companion form for (s + 50) / (s^2 + 4 s + 100)
        ss = StateSpaceModel([[-4.0, -100.0], [1.0, 0.0]], [1.0, 0.0], [1.0, 50.0])
        g = statespace_to_transfer(ss)
        assert g.num.coeffs == pytest.approx((1.0, 50.0))
        assert g.den.coeffs == pytest.approx((1.0, 4.0, 100.0))

    def test_two_mass_model_conversion(self):
        g = statespace_to_transfer(paper_verbatim_statespace())
        assert g.num.coeffs == pytest.approx((0.14769, 1458.849), rel=1e-9)
        assert g.den.coeffs[:4] == pytest.approx(
            (1.0, 333.427, 609.000909, 88908.9789), rel=1e-6
        )
        # Free integrator: the constant term is numerically zero.
        assert abs(g.den.coeffs[4]) < 1e-6 * max(abs(c) for c in g.den.coeffs)

    def test_conversion_matches_resolvent(self):
        rng = np.random.default_rng(7)
        A = rng.normal(size=(4, 4)) - 2.0 * np.eye(4)
        B = rng.normal(size=4)
        F = rng.normal(size=4)
        ss = StateSpaceModel(A, B, F)
        g = statespace_to_transfer(ss)
        for w in (0.3, 1.0, 7.7, 42.0):
            s = 1j * w
            direct = F @ np.linalg.solve(s * np.eye(4) - A, B)
            assert transfer_eval(g, s) == pytest.approx(direct, rel=1e-9)


class TestPolesAndTemplate:
    def test_system_poles_sorted_with_multiplicity(self):
        den = poly_mul(
            poly_from_roots([-1.0, -1.0, -2.0]), poly_from_roots([-1 + 2j, -1 - 2j])
        )
        g = RationalTransfer(Polynomial((1.0,)), den)
        poles = system_poles(g)
        assert len(poles) == 5
        assert poles == sorted(poles, key=lambda z: (z.real, z.imag))
        # A double root is resolved only to about sqrt(eps) by the
        # companion-matrix eigenvalues.
        assert sum(abs(p + 1) < 1e-6 for p in poles) == 2

    def test_template_structure(self):
        g = fourth_order_template(k=2.0, z1=50.0, p1=100.0, zeta=0.1, omega0=10.0)
        s = 3.0 + 1j
        manual = 2.0 * (s + 50.0) / (s * (s + 100.0) * (s * s + 2.0 * s + 100.0))
        assert transfer_eval(g, s) == pytest.approx(manual, rel=1e-12)

    @pytest.mark.parametrize(
        "kw",
        [
            dict(k=-1.0, z1=50.0, p1=100.0, zeta=0.1, omega0=10.0),
            dict(k=1.0, z1=50.0, p1=100.0, zeta=1.5, omega0=10.0),
            dict(k=1.0, z1=5.0, p1=100.0, zeta=0.1, omega0=10.0),
        ],
    )
    def test_template_validation(self, kw):
        with pytest.raises(ValueError):
            fourth_order_template(**kw)
