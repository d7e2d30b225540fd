#!/usr/bin/env python3
"""
Unit Tests for Surface Generators

Tests rotational profile shooting, mesh construction, OBJ export and
profile CSV output.
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.generators import (
    MeshError,
    MeshSpec,
    RotationalODEState,
    build_mesh,
    export_obj,
    export_profile_csv,
    format_obj,
    format_profile_csv,
    integrate_rotational_profile,
    max_profile_residual,
    read_obj,
    rotational_curvature,
)
from src.geometry import HelicoidalSurface, RegularityError, helicoidal_motion, normal_theta, parametrize
from src.profiles import CylinderProfile, InvalidInitialStateError, LineProfile


class TestRotationalProfiles:
    """Test RK4 shooting of rotational singular minimal profiles"""

    def test_curvature_formula(self):
        """Test theta' = (alpha x cos theta - z sin theta) / (x z)"""
        curvature = rotational_curvature(2.0)
        assert curvature(0.0, 1.0, 2.0, 0.0) == pytest.approx(1.0)
        assert curvature(0.0, 1.0, 1.0, math.pi / 2) == pytest.approx(-1.0)

    @pytest.mark.parametrize('alpha', [-2.0, -1.0, 1.0, 2.0])
    def test_residual_below_threshold(self, alpha):
        """Test the swept profile solves the equation at h = 0, v = (0, 0, 1)"""
        profile = integrate_rotational_profile(alpha, step=1e-3, n_steps=2000)
        assert not profile.truncated
        assert max_profile_residual(profile, alpha) < 1e-6

    def test_residual_at_nodes(self):
        """Test node states also satisfy the equation"""
        profile = integrate_rotational_profile(1.0, RotationalODEState(theta=0.0), step=1e-3, n_steps=2000)
        assert max_profile_residual(profile, 1.0, midpoints=False) < 1e-6

    def test_step_refinement_tightens_residual(self):
        """Test a 10x smaller step shrinks the residual by orders of magnitude"""
        coarse = integrate_rotational_profile(1.0, step=2e-2, n_steps=100)
        fine = integrate_rotational_profile(1.0, step=2e-3, n_steps=1000)
        ratio = max_profile_residual(coarse, 1.0) / max_profile_residual(fine, 1.0)
        assert math.log10(ratio) >= 2.5

    def test_fourth_order_endpoint(self):
        """Test RK4 endpoint differences shrink about 16x per step halving"""
        endpoints = []
        for step, n_steps in ((0.05, 20), (0.025, 40), (0.0125, 80), (0.00625, 160)):
            profile = integrate_rotational_profile(1.0, step=step, n_steps=n_steps)
            nodes = profile.nodes
            endpoints.append(np.array([nodes.x[-1], nodes.z[-1], nodes.theta[-1]]))
        diffs = [np.linalg.norm(a - b) for a, b in zip(endpoints, endpoints[1:])]
        order = math.log2(diffs[0] / diffs[1]) + math.log2(diffs[1] / diffs[2])
        assert order / 2 >= 3.5

    def test_truncation_near_floor(self):
        """Test a trajectory heading into z = 0 is truncated with a reason"""
        initial = RotationalODEState(x=1.0, z=0.01, theta=-1.5707963)
        profile = integrate_rotational_profile(-1.0, initial, step=1e-3, n_steps=100)
        assert profile.truncated
        assert profile.result.truncation_reason.startswith('z <=')
        assert np.all(profile.nodes.z > 1e-6)

    def test_describe_records_initial_state(self):
        """Test descriptor echoes alpha and the initial data"""
        profile = integrate_rotational_profile(-1.0, step=1e-2, n_steps=10)
        described = profile.describe()
        assert profile.kind == 'rotational'
        assert described['alpha'] == -1.0
        assert described['initial_theta'] == pytest.approx(math.pi / 2)
        assert described['nodes'] == 11

    @pytest.mark.parametrize('alpha,initial', [
        (0.0, RotationalODEState()),
        (1.0, RotationalODEState(x=0.0)),
        (1.0, RotationalODEState(z=-1.0)),
        (1.0, RotationalODEState(theta=float('nan'))),
    ])
    def test_invalid_initial_data(self, alpha, initial):
        """Test alpha = 0 and states off the open quadrant are rejected"""
        with pytest.raises(InvalidInitialStateError):
            integrate_rotational_profile(alpha, initial, step=1e-3, n_steps=10)


class TestProfileCSV:
    """Test the s,x,z,theta export"""

    def test_format_header_and_rows(self):
        """Test header and full-precision rows"""
        profile = integrate_rotational_profile(1.0, step=0.1, n_steps=3)
        text = format_profile_csv(profile.nodes)
        lines = text.splitlines()
        assert lines[0] == 's,x,z,theta'
        assert len(lines) == 5
        assert lines[1] == f"0,1,1,{math.pi / 2!r}"

    def test_export_writes_file(self, tmp_path):
        """Test the CSV lands on disk with LF endings"""
        profile = integrate_rotational_profile(1.0, step=0.1, n_steps=3)
        path = export_profile_csv(profile, tmp_path / 'profile.csv')
        data = path.read_bytes()
        assert b'\r' not in data
        assert data.decode('utf-8') == format_profile_csv(profile.nodes)


class TestMeshSpec:
    """Test sampling grid validation"""

    def test_single_node_rejected(self):
        """Test a count below 2 is rejected"""
        with pytest.raises(MeshError, match="count"):
            MeshSpec(s_range=(0.0, 1.0, 1), t_range=(0.0, 1.0, 2))

    def test_degenerate_range_rejected(self):
        """Test start == end is rejected"""
        with pytest.raises(MeshError, match="non-degenerate"):
            MeshSpec(s_range=(0.0, 1.0, 2), t_range=(1.0, 1.0, 2))


class TestBuildMesh:
    """Test grid triangulation"""

    @pytest.mark.parametrize('n,vertices,triangles', [(2, 4, 2), (3, 9, 8), (5, 25, 32)])
    def test_counts(self, unit_cylinder, n, vertices, triangles):
        """Test n x n grids give n^2 vertices and 2 (n - 1)^2 triangles"""
        surface = HelicoidalSurface(unit_cylinder, 0.0)
        mesh = build_mesh(surface, MeshSpec((0.0, 1.0, n), (0.0, math.pi, n)))
        assert (mesh.vertex_count, mesh.triangle_count) == (vertices, triangles)

    def test_vertices_equal_parametrization(self, generic_arc):
        """Test vertex (i, j) is Psi(s_i, t_j) at index i * n_t + j"""
        surface = HelicoidalSurface(generic_arc, 0.4)
        spec = MeshSpec((-1.0, 1.0, 4), (0.0, 3.0, 5))
        mesh = build_mesh(surface, spec)
        for i, s in enumerate(spec.s_values()):
            for j, t in enumerate(spec.t_values()):
                np.testing.assert_allclose(mesh.vertices[i * 5 + j], parametrize(surface, s, t), rtol=0, atol=1e-14)

    def test_helicoid_vertices_on_profile_radius(self, helicoid_profile):
        """Test x^2 + y^2 = x(s)^2 on the helicoid mesh"""
        surface = HelicoidalSurface(helicoid_profile, 1.0)
        spec = MeshSpec((-0.5, 0.5, 6), (0.0, 2 * math.pi, 7))
        mesh = build_mesh(surface, spec)
        radii = mesh.vertices[:, 0] ** 2 + mesh.vertices[:, 1] ** 2
        expected = np.repeat((1.0 + spec.s_values()) ** 2, 7)
        np.testing.assert_allclose(radii, expected, atol=1e-12)

    @pytest.mark.parametrize('s_range', [(-1.0, 1.0, 9), (1.0, -1.0, 9)])
    def test_winding_agrees_with_normal(self, generic_arc, s_range):
        """Test every face normal points along the closed-form normal"""
        surface = HelicoidalSurface(generic_arc, 0.5)
        spec = MeshSpec(s_range, (0.0, 2 * math.pi, 17))
        mesh = build_mesh(surface, spec)
        s_values, t_values = spec.s_values(), spec.t_values()
        face_normals = mesh.face_normals()
        for k, normal in enumerate(face_normals):
            quad = k // 2
            i, j = divmod(quad, len(t_values) - 1)
            s_mid = (s_values[i] + s_values[i + 1]) / 2
            t_mid = (t_values[j] + t_values[j + 1]) / 2
            reference = normal_theta(generic_arc.state(s_mid), 0.5, t_mid)
            assert float(normal @ reference) > 0

    def test_motion_invariance(self, generic_arc):
        """Test shifting the t range moves the mesh by the helicoidal motion"""
        surface = HelicoidalSurface(generic_arc, 0.8)
        tau = 1.3
        base = build_mesh(surface, MeshSpec((-1.0, 1.0, 5), (0.0, math.pi, 6)))
        shifted = build_mesh(surface, MeshSpec((-1.0, 1.0, 5), (tau, tau + math.pi, 6)))
        np.testing.assert_allclose(shifted.vertices, helicoidal_motion(base.vertices, tau, 0.8), atol=1e-12)
        np.testing.assert_array_equal(shifted.faces, base.faces)

    def test_singular_node_rejected(self):
        """Test a revolution surface meshed through the axis raises RegularityError"""
        surface = HelicoidalSurface(LineProfile(theta0=0.0, x0=0.0), 0.0)
        with pytest.raises(RegularityError, match="not regular"):
            build_mesh(surface, MeshSpec((-1.0, 1.0, 3), (0.0, math.pi, 3)))

    def test_metadata(self, unit_cylinder):
        """Test mesh metadata echoes the construction"""
        mesh = build_mesh(HelicoidalSurface(unit_cylinder, 0.25), MeshSpec((0.0, 1.0, 2), (0.0, 1.0, 2)))
        assert mesh.metadata['pitch'] == 0.25
        assert mesh.metadata['profile']['kind'] == 'cylinder'


class TestOBJ:
    """Test Wavefront OBJ output"""

    def test_two_by_two_has_six_lines(self, unit_cylinder):
        """Test 4 vertex and 2 face lines"""
        mesh = build_mesh(HelicoidalSurface(unit_cylinder, 0.0), MeshSpec((0.0, 1.0, 2), (0.0, 1.0, 2)))
        lines = format_obj(mesh).splitlines()
        assert len(lines) == 6
        assert [line[0] for line in lines] == ['v'] * 4 + ['f'] * 2

    def test_export_and_read_back(self, generic_arc, tmp_path):
        """Test the written file parses back to the same mesh"""
        mesh = build_mesh(HelicoidalSurface(generic_arc, 0.3), MeshSpec((-1.0, 1.0, 4), (0.0, 2.0, 4)))
        path = export_obj(mesh, tmp_path / 'arc.obj')
        assert b'\r\n' not in path.read_bytes()
        loaded = read_obj(path)
        np.testing.assert_array_equal(loaded.vertices, mesh.vertices)
        np.testing.assert_array_equal(loaded.faces, mesh.faces)

    def test_unit_cylinder_golden(self, golden_dir):
        """Test the 3 x 3 unit cylinder mesh against the frozen OBJ"""
        golden = read_obj(golden_dir / 'unit_cylinder_3x3.obj')
        surface = HelicoidalSurface(CylinderProfile(x0=1.0, z0=0.0), 0.0)
        mesh = build_mesh(surface, MeshSpec((0.0, 1.0, 3), (0.0, 2 * math.pi, 3)))
        np.testing.assert_array_equal(mesh.faces, golden.faces)
        np.testing.assert_allclose(mesh.vertices, golden.vertices, rtol=0, atol=1e-15)
