import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gouysort import (
    BeamParameter,
    FreeSpace,
    OpticalPath,
    SingularPropagationError,
    ThinLens,
    accumulate_gouy,
    gouy_phase,
    propagate_element,
    rayleigh_range,
    wrap_phase,
)

LAMBDA = 810e-9
ZR_1MM = 3.8785094488762875  # pi*(1e-3)^2 / 810e-9


def beam(z=0.0, zR=ZR_1MM):
    return BeamParameter(z=z, zR=zR, wavelength=LAMBDA)


class TestRayleighRange:
    def test_reference_waist(self):
        assert rayleigh_range(1e-3, LAMBDA) == pytest.approx(3.8785, abs=1e-4)

    def test_quadratic_scaling(self):
        assert rayleigh_range(2e-3, LAMBDA) == pytest.approx(
            4 * rayleigh_range(1e-3, LAMBDA), rel=1e-12
        )

    def test_experimental_waist(self):
        assert rayleigh_range(0.96e-3, LAMBDA) == pytest.approx(3.5745, abs=1e-4)

    @pytest.mark.parametrize("w0,lam", [(0.0, LAMBDA), (-1e-3, LAMBDA), (1e-3, 0.0), (1e-3, -1.0)])
    def test_rejects_non_positive(self, w0, lam):
        with pytest.raises(ValueError):
            rayleigh_range(w0, lam)


class TestPropagateElement:
    def test_free_space_adds_distance(self):
        out = propagate_element(beam(), FreeSpace(0.903))
        assert out.z == pytest.approx(0.903, rel=1e-15)
        assert out.zR == pytest.approx(ZR_1MM, rel=1e-15)

    def test_huge_focal_length_is_identity(self):
        out = propagate_element(beam(), ThinLens(1e12))
        assert out.z == pytest.approx(0.0, abs=1e-10)
        assert out.zR == pytest.approx(ZR_1MM, rel=1e-10)

    def test_thin_lens_against_complex_arithmetic(self):
        # independent oracle: q' = 1/(1/q - 1/f) by direct complex arithmetic
        q = complex(0.0, 3.8785)
        expected = 1.0 / (1.0 / q - 1.0 / 0.5)
        out = propagate_element(BeamParameter(0.0, 3.8785, LAMBDA), ThinLens(0.5))
        assert out.q == pytest.approx(expected, rel=1e-14)
        assert out.q == pytest.approx(-0.49182619869736083 + 0.06340417670457148j, rel=1e-12)

    def test_singular_propagation(self):
        # q numerically equal to f makes C*q + D vanish
        nearly_real = BeamParameter(z=0.5, zR=1e-13, wavelength=LAMBDA)
        with pytest.raises(SingularPropagationError):
            propagate_element(nearly_real, ThinLens(0.5))

    def test_wavelength_preserved(self):
        out = propagate_element(beam(), ThinLens(0.25))
        assert out.wavelength == LAMBDA


class TestGouyPhase:
    def test_zero_at_waist(self):
        assert gouy_phase(beam()) == 0.0

    def test_asymptote(self):
        assert gouy_phase(beam(z=1e9 * ZR_1MM)) > math.pi / 2 - 1e-6

    def test_scalar_value(self):
        b = BeamParameter(0.903, 3.8785, LAMBDA)
        assert gouy_phase(b) == pytest.approx(math.atan(0.903 / 3.8785), rel=1e-15)
        assert gouy_phase(b) == pytest.approx(0.2288, abs=1e-4)


class TestAccumulateGouy:
    def test_empty_path(self):
        result = accumulate_gouy(beam(), OpticalPath())
        assert result.gouyAccumulated == 0.0
        assert result.qOut == beam()

    def test_half_pi_arm_matches_three_half_pi(self):
        # published lens arm and gap lengths for the half-pi sorter
        arm = OpticalPath.lens_arm(0.5, 0.5608, 0.04, 0.3443, 0.3)
        res_a = accumulate_gouy(beam(), arm)
        res_b = accumulate_gouy(beam(), OpticalPath.free_space(0.5608 + 0.3443))
        delta = res_a.gouyAccumulated - res_b.gouyAccumulated
        assert delta == pytest.approx(1.5 * math.pi, abs=0.002 * math.pi)
        assert wrap_phase(delta) == pytest.approx(-0.5 * math.pi, abs=0.002 * math.pi)

    def test_free_space_split_equivalence(self):
        whole = accumulate_gouy(beam(), OpticalPath.free_space(0.9))
        split = accumulate_gouy(
            beam(), OpticalPath((FreeSpace(0.4), FreeSpace(0.5)))
        )
        assert split.gouyAccumulated == pytest.approx(whole.gouyAccumulated, abs=1e-12)
        assert split.qOut.z == pytest.approx(whole.qOut.z, rel=1e-12)

    def test_monotonic_from_waist(self):
        phases = [
            accumulate_gouy(beam(), OpticalPath.free_space(d)).gouyAccumulated
            for d in [0.1, 0.5, 1.0, 5.0, 25.0]
        ]
        assert phases == sorted(phases)
        assert all(p > 0 for p in phases)


elements = st.one_of(
    st.builds(FreeSpace, st.floats(0.0, 2.0)),
    st.builds(
        ThinLens,
        st.floats(0.02, 2.0).flatmap(lambda f: st.sampled_from([f, -f])),
    ),
)
beams = st.builds(
    BeamParameter,
    z=st.floats(-5.0, 5.0),
    zR=st.floats(0.01, 10.0),
    wavelength=st.just(LAMBDA),
)


def _abcd_compose(e1, e2):
    a1, b1, c1, d1 = e1.abcd()
    a2, b2, c2, d2 = e2.abcd()
    # matrix product M2 @ M1 (element applied first goes right)
    return (
        a2 * a1 + b2 * c1,
        a2 * b1 + b2 * d1,
        c2 * a1 + d2 * c1,
        c2 * b1 + d2 * d1,
    )


class TestProperties:
    @settings(max_examples=200, deadline=None)
    @given(b=beams, e1=elements, e2=elements)
    def test_composition_matches_matrix_product(self, b, e1, e2):
        try:
            stepwise = propagate_element(propagate_element(b, e1), e2)
        except SingularPropagationError:
            return
        a, bb, c, d = _abcd_compose(e1, e2)
        q = b.q
        composed = (a * q + bb) / (c * q + d)
        assert stepwise.q == pytest.approx(composed, rel=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(b=beams, e=elements)
    def test_positive_imaginary_preserved(self, b, e):
        try:
            out = propagate_element(b, e)
        except SingularPropagationError:
            return
        assert out.zR > 0

    @settings(max_examples=100, deadline=None)
    @given(b=beams, f=st.floats(0.05, 2.0))
    def test_lens_reversibility(self, b, f):
        forward = propagate_element(b, ThinLens(f))
        restored = propagate_element(forward, ThinLens(-f))
        assert restored.q == pytest.approx(b.q, rel=1e-12)


class TestValidation:
    def test_negative_rayleigh_rejected(self):
        with pytest.raises(ValueError):
            BeamParameter(0.0, -1.0, LAMBDA)

    def test_negative_free_space_rejected(self):
        with pytest.raises(ValueError):
            FreeSpace(-0.1)

    def test_zero_focal_length_rejected(self):
        with pytest.raises(ValueError):
            ThinLens(0.0)

    def test_path_length(self):
        arm = OpticalPath.lens_arm(0.5, 0.56, 0.04, 0.343, 0.3)
        assert arm.geometric_length == pytest.approx(0.903, rel=1e-15)


class TestWrapPhase:
    @pytest.mark.parametrize(
        "raw,expected",
        [(0.0, 0.0), (1.5 * math.pi, -0.5 * math.pi), (math.pi, math.pi), (-math.pi, math.pi), (2.5 * math.pi, 0.5 * math.pi)],
    )
    def test_values(self, raw, expected):
        assert wrap_phase(raw) == pytest.approx(expected, abs=1e-12)
