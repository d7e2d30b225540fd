#!/usr/bin/env python3
"""
Surface Generators

Forward constructions on top of the geometry core:

- rotational singular minimal profiles (h = 0, v = (0, 0, 1)) by RK4 shooting
  of theta' = (alpha x cos theta - z sin theta) / (x z), obtained from the
  vanishing of A0 at h = 0 after division by x^2 z;
- triangle meshes of helicoidal surfaces on a (s, t) grid;
- Wavefront OBJ and profile CSV export.
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from .config import Config
from .geometry import (
    HelicoidalSurface,
    RegularityError,
    normal_theta,
    parametrize,
    regularity_of_state,
)
from .profiles import IntegratedProfile, InvalidInitialStateError, ProfileState, rk4_integrate
from .residuals import SMSParams, residual

logger = logging.getLogger(__name__)

VERTICAL = (0.0, 0.0, 1.0)


class MeshError(Exception):
    """Exception raised for invalid mesh specifications or meshing failures."""
    pass


@dataclass(frozen=True)
class RotationalODEState:
    """Initial data (s, x, z, theta) for the rotational profile ODE."""
    s: float = 0.0
    x: float = 1.0
    z: float = 1.0
    theta: float = math.pi / 2

    def to_dict(self) -> Dict[str, float]:
        return {'s': self.s, 'x': self.x, 'z': self.z, 'theta': self.theta}


def rotational_curvature(alpha: float):
    """theta' = (alpha x cos theta - z sin theta) / (x z)."""
    def curvature(s: float, x: float, z: float, theta: float) -> float:
        denominator = x * z
        if denominator == 0.0:
            return math.inf
        return (alpha * x * math.cos(theta) - z * math.sin(theta)) / denominator
    return curvature


def integrate_rotational_profile(alpha: float, initial: RotationalODEState = None,
                                 step: float = None, n_steps: int = 2000) -> IntegratedProfile:
    """
    Shoot a rotational singular minimal profile from initial data

    Args:
        alpha: Exponent of the singular minimal equation (nonzero)
        initial: Starting state, x > 0 and z > 0
        step: RK4 step (defaults to Config.RK4_STEP)
        n_steps: Number of steps to attempt

    Returns:
        IntegratedProfile; ``truncated`` is set when x or z dropped to
        Config.TRUNCATION_FLOOR before n_steps

    Raises:
        InvalidInitialStateError: For alpha = 0, x <= 0, z <= 0 or a bad step
    """
    initial = initial or RotationalODEState()
    step = Config.RK4_STEP if step is None else float(step)
    if not math.isfinite(alpha) or alpha == 0.0:
        raise InvalidInitialStateError(f"alpha must be finite and nonzero, got {alpha}")
    if not (initial.x > 0 and initial.z > 0):
        raise InvalidInitialStateError(f"initial state needs x > 0 and z > 0, got x={initial.x}, z={initial.z}")
    if not (math.isfinite(initial.theta) and math.isfinite(initial.s)):
        raise InvalidInitialStateError("initial s and theta must be finite")

    floor = Config.TRUNCATION_FLOOR

    def stop(s: float, x: float, z: float, theta: float) -> Optional[str]:
        if x <= floor:
            return f"x <= {floor} at s={s}"
        if z <= floor:
            return f"z <= {floor} at s={s}"
        return None

    result = rk4_integrate(rotational_curvature(alpha), initial.s, initial.x, initial.z, initial.theta,
                           step, n_steps, stop=stop)
    if result.truncated:
        logger.warning(f"Rotational profile (alpha={alpha}) truncated after {len(result.s) - 1} "
                       f"of {n_steps} steps: {result.truncation_reason}")

    params = {'alpha': float(alpha), 'n_steps': int(n_steps)}
    params.update({f"initial_{k}": v for k, v in initial.to_dict().items()})
    profile = IntegratedProfile(result, step, params)
    profile.kind = 'rotational'
    return profile


def max_profile_residual(profile: IntegratedProfile, alpha: float, midpoints: bool = True) -> float:
    """
    Largest |H - alpha <N, v> / <p, v>| on the h = 0, v = (0, 0, 1) surface

    Args:
        profile: Integrated rotational profile
        alpha: Exponent used to shoot the profile
        midpoints: Evaluate halfway between nodes (interpolated states) rather than at nodes

    Returns:
        Maximum absolute residual over interior samples
    """
    nodes = profile.result.s
    samples = (nodes[:-1] + nodes[1:]) / 2 if midpoints else nodes[1:-1]
    surface = HelicoidalSurface(profile, pitch=0.0)
    params = SMSParams(alpha=alpha, direction=VERTICAL)
    worst = 0.0
    for s in samples:
        worst = max(worst, abs(residual(surface, params, float(s), 0.0)))
    return worst


def _format_number(value: float) -> str:
    return format(float(value), '.17g')


def export_profile_csv(profile: IntegratedProfile, path: Union[str, Path]) -> Path:
    """
    Write the nodes as CSV with header "s,x,z,theta" and 17 significant digits

    Returns:
        The written path
    """
    path = Path(path)
    nodes = profile.nodes
    with open(path, 'w', encoding='utf-8', newline='\n') as file:
        file.write(format_profile_csv(nodes))
    logger.info(f"Wrote {len(nodes)} profile rows to {path}")
    return path


def format_profile_csv(nodes: ProfileState) -> str:
    lines = ['s,x,z,theta']
    for s, x, z, theta in zip(nodes.s, nodes.x, nodes.z, nodes.theta):
        lines.append(','.join(_format_number(v) for v in (s, x, z, theta)))
    return '\n'.join(lines) + '\n'


@dataclass(frozen=True)
class MeshSpec:
    """Sampling grid (start, end, count) in s and t plus an optional output path."""
    s_range: Tuple[float, float, int]
    t_range: Tuple[float, float, int]
    output: Optional[Path] = None

    def __post_init__(self):
        for name in ('s_range', 't_range'):
            start, end, count = getattr(self, name)
            if int(count) != count or count < 2:
                raise MeshError(f"{name} count must be an integer >= 2, got {count}")
            if not (math.isfinite(start) and math.isfinite(end)) or start == end:
                raise MeshError(f"{name} must be a finite non-degenerate range, got ({start}, {end})")

    def s_values(self) -> np.ndarray:
        start, end, count = self.s_range
        return np.linspace(start, end, int(count))

    def t_values(self) -> np.ndarray:
        start, end, count = self.t_range
        return np.linspace(start, end, int(count))


@dataclass
class TriangleMesh:
    """Vertex array (n, 3) and zero-based triangle index array (m, 3)."""
    vertices: np.ndarray
    faces: np.ndarray
    metadata: Dict[str, Any] = None

    def __post_init__(self):
        if self.metadata is None:
            self.metadata = {}

    @property
    def vertex_count(self) -> int:
        return int(self.vertices.shape[0])

    @property
    def triangle_count(self) -> int:
        return int(self.faces.shape[0])

    def face_normals(self) -> np.ndarray:
        a, b, c = (self.vertices[self.faces[:, k]] for k in range(3))
        return np.cross(b - a, c - a)


def build_mesh(surface: HelicoidalSurface, spec: MeshSpec) -> TriangleMesh:
    """
    Triangulate the (s, t) grid of the parametrization

    Vertex (i, j) is Psi(s_i, t_j) at index i * count_t + j; each quad gives two
    triangles wound so their normals agree with the closed-form normal.

    Raises:
        RegularityError: If any grid node is not regular
        MeshError: If a vertex is not finite
    """
    s_values, t_values = spec.s_values(), spec.t_values()
    states = surface.profile.state(s_values)
    reg = regularity_of_state(states, surface.pitch)
    if np.any(reg <= surface.eps_reg):
        bad = int(np.argmin(reg))
        raise RegularityError(
            f"mesh node s={s_values[bad]!r} not regular: EG - F^2 = {float(reg[bad])!r}",
            float(reg[bad]), surface.eps_reg,
        )

    vertices = parametrize(surface, s_values[:, np.newaxis], t_values[np.newaxis, :]).reshape(-1, 3)
    if not np.all(np.isfinite(vertices)):
        raise MeshError("non-finite vertex in mesh")

    n_s, n_t = len(s_values), len(t_values)
    faces: List[Tuple[int, int, int]] = []
    for i in range(n_s - 1):
        for j in range(n_t - 1):
            a = i * n_t + j
            b = (i + 1) * n_t + j
            c = (i + 1) * n_t + j + 1
            d = i * n_t + j + 1
            faces.append((a, b, c))
            faces.append((a, c, d))
    mesh = TriangleMesh(vertices=vertices, faces=np.array(faces, dtype=np.int64))

    # Winding follows sign(ds * dt); flip once if it opposes the closed-form normal
    s_mid = (s_values[0] + s_values[1]) / 2
    t_mid = (t_values[0] + t_values[1]) / 2
    reference = normal_theta(surface.profile.state(s_mid), surface.pitch, t_mid)
    if float(mesh.face_normals()[0] @ reference) < 0:
        mesh.faces = mesh.faces[:, [0, 2, 1]]

    mesh.metadata = {
        'profile': surface.profile.describe(),
        'pitch': surface.pitch,
        's_range': list(spec.s_range),
        't_range': list(spec.t_range),
    }
    logger.info(f"Built mesh with {mesh.vertex_count} vertices and {mesh.triangle_count} triangles")
    return mesh


def format_obj(mesh: TriangleMesh) -> str:
    lines = [f"v {' '.join(_format_number(c) for c in vertex)}" for vertex in mesh.vertices]
    lines.extend(f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.faces)
    return '\n'.join(lines) + '\n'


def export_obj(mesh: TriangleMesh, path: Union[str, Path]) -> Path:
    """
    Write a Wavefront OBJ file: "v x y z" lines then "f i j k" (1-based), LF endings

    Raises:
        OSError: If the file cannot be written
    """
    path = Path(path)
    with open(path, 'w', encoding='utf-8', newline='\n') as file:
        file.write(format_obj(mesh))
    logger.info(f"Wrote OBJ mesh to {path}")
    return path


def read_obj(path: Union[str, Path]) -> TriangleMesh:
    """Parse an OBJ file written by export_obj."""
    vertices, faces = [], []
    with open(path, 'r', encoding='utf-8') as file:
        for line in file:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == 'v':
                vertices.append([float(p) for p in parts[1:4]])
            elif parts[0] == 'f':
                faces.append([int(p.split('/')[0]) - 1 for p in parts[1:4]])
    return TriangleMesh(vertices=np.array(vertices, dtype=float).reshape(-1, 3),
                        faces=np.array(faces, dtype=np.int64).reshape(-1, 3))
