#!/usr/bin/env python3
"""
Unit Tests for Helicoidal Surface Geometry

Tests the helicoidal motion, parametrization, normals, fundamental forms,
mean curvature formulas and regularity checks.
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.geometry import (
    DegenerateDenominatorError,
    FundamentalForms,
    GeometryError,
    HelicoidalSurface,
    NonFiniteInputError,
    RegularityError,
    as_unit_vec3,
    fundamental_forms,
    helicoidal_motion,
    mean_curvature_general,
    mean_curvature_theta,
    normal_general,
    normal_theta,
    normalize,
    parametrize,
    regularity,
    surface_jet,
)
from src.profiles import ArcProfile, CylinderProfile, LineProfile, ProfileState

finite = st.floats(min_value=-5.0, max_value=5.0, allow_nan=False, allow_infinity=False)


class TestVectors:
    """Test vector validation helpers"""

    def test_unit_vector_accepted(self):
        """Test exact unit vectors pass"""
        np.testing.assert_array_equal(as_unit_vec3([0.0, 0.0, 1.0]), [0.0, 0.0, 1.0])

    def test_non_unit_vector_rejected(self):
        """Test vectors off the unit sphere are rejected"""
        with pytest.raises(GeometryError, match="unit vector"):
            as_unit_vec3([1.0, 1.0, 0.0])

    def test_nan_rejected(self):
        """Test NaN components raise NonFiniteInputError"""
        with pytest.raises(NonFiniteInputError):
            as_unit_vec3([float('nan'), 0.0, 1.0])

    def test_wrong_shape(self):
        """Test two-component input is rejected"""
        with pytest.raises(GeometryError, match="three components"):
            normalize([1.0, 0.0])

    def test_normalize_zero(self):
        """Test the zero vector cannot be normalized"""
        with pytest.raises(GeometryError, match="zero vector"):
            normalize([0.0, 0.0, 0.0])


class TestHelicoidalMotion:
    """Test the one-parameter helicoidal group"""

    def test_identity_at_zero(self):
        """Test H_0 is the identity"""
        p = np.array([1.0, -2.0, 3.0])
        np.testing.assert_allclose(helicoidal_motion(p, 0.0, 2.0), p)

    def test_quarter_turn(self):
        """Test H_{pi/2} rotates x to y and lifts by h pi/2"""
        moved = helicoidal_motion([1.0, 0.0, 0.0], math.pi / 2, 2.0)
        np.testing.assert_allclose(moved, [0.0, 1.0, math.pi], atol=1e-15)

    @settings(max_examples=60, deadline=None)
    @given(finite, finite, finite, finite, finite, finite)
    def test_group_composition(self, x, y, z, t, u, h):
        """Test H_t(H_u(p)) = H_{t+u}(p)"""
        p = np.array([x, y, z])
        twice = helicoidal_motion(helicoidal_motion(p, u, h), t, h)
        once = helicoidal_motion(p, t + u, h)
        np.testing.assert_allclose(twice, once, atol=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(finite, finite, finite, finite, finite)
    def test_preserves_axis_distance(self, x, y, z, t, h):
        """Test x^2 + y^2 is invariant"""
        moved = helicoidal_motion([x, y, z], t, h)
        assert math.hypot(moved[0], moved[1]) == pytest.approx(math.hypot(x, y), abs=1e-12)

    def test_rejects_infinite_parameter(self):
        """Test infinite t raises NonFiniteInputError"""
        with pytest.raises(NonFiniteInputError):
            helicoidal_motion([1.0, 0.0, 0.0], float('inf'), 1.0)


class TestParametrization:
    """Test Psi(s, t) = H_t(gamma(s))"""

    def test_matches_motion_of_profile_point(self, generic_arc):
        """Test the parametrization is the profile point moved by H_t"""
        surface = HelicoidalSurface(generic_arc, 0.7)
        state = generic_arc.state(0.3)
        expected = helicoidal_motion([state.x, 0.0, state.z], 1.1, 0.7)
        np.testing.assert_allclose(parametrize(surface, 0.3, 1.1), expected, atol=1e-15)

    def test_broadcast_grid(self, helicoid_profile):
        """Test s and t broadcast to a grid of points"""
        surface = HelicoidalSurface(helicoid_profile, 1.0)
        s = np.linspace(-1.0, 1.0, 4)[:, np.newaxis]
        t = np.linspace(0.0, math.pi, 5)[np.newaxis, :]
        points = parametrize(surface, s, t)
        assert points.shape == (4, 5, 3)
        np.testing.assert_allclose(points[..., 0] ** 2 + points[..., 1] ** 2,
                                   np.broadcast_to((1.0 + s) ** 2, (4, 5)), atol=1e-12)

    def test_jet_point_matches_parametrization(self, generic_arc):
        """Test the jet point equals Psi(s, t)"""
        surface = HelicoidalSurface(generic_arc, -0.4)
        jet = surface_jet(surface, 0.5, 2.0)
        np.testing.assert_allclose(jet.point, parametrize(surface, 0.5, 2.0), atol=1e-15)

    def test_non_finite_pitch(self, unit_cylinder):
        """Test infinite pitch is rejected"""
        with pytest.raises(NonFiniteInputError):
            HelicoidalSurface(unit_cylinder, float('inf'))


class TestNormal:
    """Test the closed-form unit normal"""

    def test_unit_length_and_orthogonality(self, generic_arc):
        """Test N is unit and normal to both partials"""
        surface = HelicoidalSurface(generic_arc, 1.3)
        for s, t in [(0.0, 0.0), (0.4, 1.0), (-0.7, 4.0)]:
            jet = surface_jet(surface, s, t)
            normal = normal_theta(generic_arc.state(s), 1.3, t)
            assert np.linalg.norm(normal) == pytest.approx(1.0, abs=1e-14)
            assert float(np.dot(normal, jet.psi_s)) == pytest.approx(0.0, abs=1e-13)
            assert float(np.dot(normal, jet.psi_t)) == pytest.approx(0.0, abs=1e-13)

    def test_matches_cross_product_orientation(self, generic_arc):
        """Test N points along Psi_s x Psi_t"""
        surface = HelicoidalSurface(generic_arc, 0.8)
        jet = surface_jet(surface, 0.2, 0.9)
        cross = np.cross(jet.psi_s, jet.psi_t)
        np.testing.assert_allclose(normal_theta(generic_arc.state(0.2), 0.8, 0.9),
                                   cross / np.linalg.norm(cross), atol=1e-14)

    def test_general_form_matches_theta_form(self, rng, random_states):
        """Test normal_general with (cos theta, sin theta) equals normal_theta on 1000 samples"""
        states = random_states(rng, 1000)
        t = rng.uniform(0.0, 2 * math.pi, 1000)
        for h in (0.0, -0.6, 1.7):
            general = normal_general(states.x, np.cos(states.theta), np.sin(states.theta), h, t)
            np.testing.assert_allclose(general, normal_theta(states, h, t), rtol=0.0, atol=1e-14)

    def test_cross_product_on_random_samples(self, rng, random_states):
        """Test N = Psi_s x Psi_t / |Psi_s x Psi_t| on 1000 samples"""
        states = random_states(rng, 1000)
        t = rng.uniform(0.0, 2 * math.pi, 1000)
        cos_t, sin_t = np.cos(t), np.sin(t)
        for h in (0.0, 0.8, -2.0):
            psi_s = np.stack([states.x_prime * cos_t, states.x_prime * sin_t, states.z_prime], axis=-1)
            psi_t = np.stack([-states.x * sin_t, states.x * cos_t, np.full_like(t, h)], axis=-1)
            cross = np.cross(psi_s, psi_t)
            expected = cross / np.linalg.norm(cross, axis=-1)[:, np.newaxis]
            np.testing.assert_allclose(normal_theta(states, h, t), expected, rtol=0.0, atol=1e-13)

    def test_cylinder_normal_points_inward(self, unit_cylinder):
        """Test the unit cylinder normal is -(cos t, sin t, 0)"""
        normal = normal_theta(unit_cylinder.state(0.0), 0.0, 0.3)
        np.testing.assert_allclose(normal, [-math.cos(0.3), -math.sin(0.3), 0.0], atol=1e-15)

    def test_degenerate_denominator(self):
        """Test x = 0 with x' = 0 has no normal"""
        with pytest.raises(DegenerateDenominatorError):
            normal_general(0.0, 0.0, 1.0, 2.0, 0.0)


class TestMeanCurvature:
    """Test the two closed-form mean curvature expressions"""

    def test_unit_cylinder_is_one(self, unit_cylinder):
        """Test H = 1 on the unit cylinder and -1 with reversed orientation"""
        up = mean_curvature_theta(unit_cylinder.state(0.0), 0.0)
        down = mean_curvature_theta(CylinderProfile(x0=1.0, sign=-1).state(0.0), 0.0)
        assert up == 1.0
        assert down == -1.0

    def test_helicoid_is_minimal(self, helicoid_profile):
        """Test the right helicoid has H = 0 for every pitch"""
        states = helicoid_profile.state(np.linspace(-2.0, 2.0, 9))
        for h in (0.5, 1.0, 3.0):
            assert np.all(mean_curvature_theta(states, h) == 0.0)

    def test_sphere_has_curvature_two(self):
        """Test the unit sphere meridian gives H = 2 with inward normal"""
        meridian = ArcProfile(kappa=1.0, theta0=math.pi / 2, x0=1.0, domain=(-1.0, 1.0))
        values = mean_curvature_theta(meridian.state(np.linspace(-1.0, 1.0, 7)), 0.0)
        np.testing.assert_allclose(values, 2.0, atol=1e-14)

    def test_general_form_agrees_with_theta_form(self, rng, random_states):
        """Test the (x', z') formula matches the turning-angle formula"""
        states = random_states(rng, 200)
        for h in (0.0, 0.3, 2.0):
            general = mean_curvature_general(states.x, states.x_prime, states.x_second,
                                             states.z_prime, states.z_second, h)
            theta = mean_curvature_theta(states, h)
            np.testing.assert_allclose(general, theta, rtol=1e-12, atol=1e-12)

    def test_fundamental_forms_agree(self, generic_arc):
        """Test (eG - 2fF + gE)/(EG - F^2) matches the closed form"""
        surface = HelicoidalSurface(generic_arc, 0.9)
        for s in (-1.0, 0.0, 1.5):
            forms = fundamental_forms(surface, s, 0.4)
            assert forms.mean_curvature() == pytest.approx(
                float(mean_curvature_theta(generic_arc.state(s), 0.9)), rel=1e-12, abs=1e-12
            )

    def test_degenerate_denominator(self):
        """Test x = 0 with cos theta = 0 raises"""
        state = ProfileState(s=0.0, x=0.0, z=1.0, theta=math.pi / 2, theta_prime=0.0)
        with pytest.raises(DegenerateDenominatorError):
            mean_curvature_theta(state, 1.0)


class TestRegularity:
    """Test the immersion measure EG - F^2"""

    def test_regularity_value(self, generic_arc):
        """Test EG - F^2 = x^2 + h^2 cos^2 theta"""
        surface = HelicoidalSurface(generic_arc, 1.5)
        state = generic_arc.state(0.2)
        expected = state.x ** 2 + 2.25 * math.cos(state.theta) ** 2
        assert regularity(surface, 0.2) == pytest.approx(expected, rel=1e-15)

    def test_forms_determinant_matches(self, generic_arc):
        """Test the fundamental form determinant equals the regularity value"""
        surface = HelicoidalSurface(generic_arc, 1.5)
        forms = fundamental_forms(surface, 0.2, 0.0)
        assert forms.determinant == pytest.approx(float(regularity(surface, 0.2)), rel=1e-14)

    def test_axis_crossing_is_singular(self):
        """Test a revolution surface through the axis fails regularity"""
        surface = HelicoidalSurface(LineProfile(theta0=0.0, x0=0.0), 0.0)
        with pytest.raises(RegularityError) as excinfo:
            fundamental_forms(surface, 0.0, 0.0)
        assert excinfo.value.value == 0.0
        assert excinfo.value.threshold == surface.eps_reg

    def test_pitch_regularizes_axis_crossing(self):
        """Test h != 0 keeps a horizontal profile through the axis regular"""
        surface = HelicoidalSurface(LineProfile(theta0=0.0, x0=0.0), 1.0)
        assert fundamental_forms(surface, 0.0, 0.0).determinant == pytest.approx(1.0)


class TestMotionInvariance:
    """Test quantities that must not depend on the motion parameter t"""

    @staticmethod
    def _forms_from_jet(surface, s, t):
        jet = surface_jet(surface, s, t)
        normal = normal_theta(surface.profile.state(s), surface.pitch, t)
        return FundamentalForms(
            E=float(jet.psi_s @ jet.psi_s),
            F=float(jet.psi_s @ jet.psi_t),
            G=float(jet.psi_t @ jet.psi_t),
            e=float(jet.psi_ss @ normal),
            f=float(jet.psi_st @ normal),
            g=float(jet.psi_tt @ normal),
        )

    def test_forms_and_curvature_independent_of_t(self, rng):
        """Test forms built from the jet at any t equal the closed-form forms"""
        for _ in range(40):
            kappa = rng.uniform(0.1, 0.5) * rng.choice([-1.0, 1.0])
            arc = ArcProfile(kappa=kappa, theta0=rng.uniform(0.0, 2 * math.pi),
                             x0=rng.uniform(1.5, 2.5) * rng.choice([-1.0, 1.0]), z0=rng.uniform(-1.0, 1.0))
            surface = HelicoidalSurface(arc, rng.uniform(-1.5, 1.5))
            s = rng.uniform(-1.0, 1.0)
            exact = fundamental_forms(surface, s, 0.0)
            scale = max(1.0, abs(exact.G))
            curvatures = []
            for t in rng.uniform(-2 * math.pi, 2 * math.pi, 8):
                forms = self._forms_from_jet(surface, s, t)
                for name in ('E', 'F', 'G', 'e', 'f', 'g'):
                    assert abs(getattr(forms, name) - getattr(exact, name)) <= 1e-14 * scale
                curvatures.append(forms.mean_curvature())
            assert max(curvatures) - min(curvatures) <= 1e-12 * max(1.0, abs(exact.mean_curvature()))
