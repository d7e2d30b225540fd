#!/usr/bin/env python3
"""
Helicoidal Surface Geometry

Closed-form geometry of surfaces swept by the helicoidal group
H_t(x, y, z) = (x cos t - y sin t, x sin t + y cos t, z + h t) with the
z-axis as twist axis: parametrization, analytic jets, fundamental forms,
unit normal, mean curvature (sum of principal curvatures) and regularity.

All functions are pure and broadcast over numpy arrays of samples.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .config import Config
from .profiles import ArrayLike, Profile, ProfileState

logger = logging.getLogger(__name__)


class GeometryError(Exception):
    """Base exception for geometry evaluation errors."""
    pass


class RegularityError(GeometryError):
    """Exception raised when EG - F^2 drops to the regularity threshold."""
    def __init__(self, message: str, value: float, threshold: float):
        super().__init__(message)
        self.value = value
        self.threshold = threshold


class DegenerateDenominatorError(GeometryError):
    """Exception raised when a normal or curvature denominator vanishes."""
    pass


class NonFiniteInputError(GeometryError):
    """Exception raised for NaN or infinite inputs."""
    pass


Vec3 = np.ndarray


def as_vec3(p: Union[Sequence[float], np.ndarray]) -> Vec3:
    """Validate a point (or array of points) with finite components."""
    arr = np.asarray(p, dtype=float)
    if arr.shape[-1:] != (3,):
        raise GeometryError(f"expected three components, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInputError(f"non-finite vector components: {arr}")
    return arr


def as_unit_vec3(v: Union[Sequence[float], np.ndarray], tol: float = None) -> Vec3:
    """Validate a unit vector; its norm must equal 1 within ``tol``."""
    tol = Config.UNIT_TOL if tol is None else tol
    arr = as_vec3(v)
    norm = float(np.linalg.norm(arr))
    if abs(norm - 1.0) > tol:
        raise GeometryError(f"expected a unit vector, got norm {norm!r}")
    return arr


def normalize(v: Union[Sequence[float], np.ndarray]) -> Vec3:
    """Scale a nonzero vector to unit length."""
    arr = as_vec3(v)
    norm = float(np.linalg.norm(arr))
    if norm == 0.0:
        raise GeometryError("cannot normalize the zero vector")
    return arr / norm


def _require_finite(*values: ArrayLike) -> None:
    for value in values:
        if not np.all(np.isfinite(value)):
            raise NonFiniteInputError("non-finite input to a geometry operation")


@dataclass(frozen=True)
class HelicoidalSurface:
    """A profile swept by the helicoidal group of pitch h (length per radian).

    With h = 0 this is a surface of revolution about the z-axis.
    """
    profile: Profile
    pitch: float
    eps_reg: float = field(default_factory=lambda: Config.EPS_REG)

    def __post_init__(self):
        if not math.isfinite(self.pitch):
            raise NonFiniteInputError(f"pitch must be finite, got {self.pitch}")

    def require_regular(self, s: ArrayLike) -> ProfileState:
        """Profile state at s, after checking EG - F^2 > eps_reg at every sample."""
        state = self.profile.state(s)
        value = regularity_of_state(state, self.pitch)
        if np.any(value <= self.eps_reg):
            worst = float(np.min(value))
            raise RegularityError(
                f"surface not regular: EG - F^2 = {worst!r} <= {self.eps_reg!r}", worst, self.eps_reg
            )
        return state


@dataclass(frozen=True)
class SurfaceJet:
    """Point and first/second partials of the parametrization."""
    point: Vec3
    psi_s: Vec3
    psi_t: Vec3
    psi_ss: Vec3
    psi_st: Vec3
    psi_tt: Vec3


@dataclass(frozen=True)
class FundamentalForms:
    """First (E, F, G) and second (e, f, g) fundamental form coefficients."""
    E: float
    F: float
    G: float
    e: float
    f: float
    g: float

    @property
    def determinant(self) -> float:
        return self.E * self.G - self.F ** 2

    def mean_curvature(self) -> float:
        """Sum of principal curvatures (eG - 2fF + gE) / (EG - F^2)."""
        return (self.e * self.G - 2 * self.f * self.F + self.g * self.E) / self.determinant


def helicoidal_motion(p: Union[Sequence[float], np.ndarray], t: ArrayLike, h: float) -> Vec3:
    """
    Apply the helicoidal motion H_t of pitch h

    Args:
        p: Point or array of points (..., 3)
        t: Motion parameter (radians)
        h: Pitch

    Returns:
        (x cos t - y sin t, x sin t + y cos t, z + h t)
    """
    arr = as_vec3(p)
    _require_finite(t, h)
    x, y, z = arr[..., 0], arr[..., 1], arr[..., 2]
    cos_t, sin_t = np.cos(t), np.sin(t)
    return np.stack([x * cos_t - y * sin_t, x * sin_t + y * cos_t, z + h * t], axis=-1)


def parametrize(surface: HelicoidalSurface, s: ArrayLike, t: ArrayLike) -> Vec3:
    """Psi(s, t) = H_t(gamma(s)) = (x(s) cos t, x(s) sin t, z(s) + h t)."""
    _require_finite(t)
    state = surface.profile.state(s)
    x, z = np.asarray(state.x), np.asarray(state.z)
    t = np.asarray(t, dtype=float)
    return np.stack(np.broadcast_arrays(x * np.cos(t), x * np.sin(t), z + surface.pitch * t), axis=-1)


def surface_jet(surface: HelicoidalSurface, s: float, t: float) -> SurfaceJet:
    """
    Analytic partials of the parametrization

    Uses x' = cos theta, z' = sin theta, x'' = -theta' sin theta, z'' = theta' cos theta.
    """
    _require_finite(t)
    state = surface.profile.state(s)
    h = surface.pitch
    x, z = state.x, state.z
    xp, zp, xpp, zpp = state.x_prime, state.z_prime, state.x_second, state.z_second
    cos_t, sin_t = math.cos(t), math.sin(t)
    return SurfaceJet(
        point=np.array([x * cos_t, x * sin_t, z + h * t]),
        psi_s=np.array([xp * cos_t, xp * sin_t, zp]),
        psi_t=np.array([-x * sin_t, x * cos_t, h]),
        psi_ss=np.array([xpp * cos_t, xpp * sin_t, zpp]),
        psi_st=np.array([-xp * sin_t, xp * cos_t, 0.0]),
        psi_tt=np.array([-x * cos_t, -x * sin_t, 0.0]),
    )


def regularity_of_state(state: ProfileState, h: float) -> ArrayLike:
    """EG - F^2 = x^2 + h^2 cos^2 theta for a profile state."""
    return state.x ** 2 + h ** 2 * state.x_prime ** 2


def regularity(surface: HelicoidalSurface, s: ArrayLike) -> ArrayLike:
    """
    Immersion measure EG - F^2 at s

    Returns the value without thresholding; callers decide.
    """
    return regularity_of_state(surface.profile.state(s), surface.pitch)


def fundamental_forms(surface: HelicoidalSurface, s: float, t: float) -> FundamentalForms:
    """
    First and second fundamental forms (independent of t)

    Raises:
        RegularityError: If EG - F^2 <= eps_reg at s
    """
    _require_finite(t)
    state = surface.require_regular(s)
    h = surface.pitch
    x, xp, zp = state.x, state.x_prime, state.z_prime
    root = math.sqrt(h ** 2 * xp ** 2 + x ** 2)
    return FundamentalForms(
        E=1.0,
        F=h * zp,
        G=x ** 2 + h ** 2,
        e=x * (state.z_second * xp - zp * state.x_second) / root,
        f=-h * xp ** 2 / root,
        g=x ** 2 * zp / root,
    )


def normal_general(x: ArrayLike, x_prime: ArrayLike, z_prime: ArrayLike, h: float, t: ArrayLike,
                   eps: float = None) -> Vec3:
    """
    Unit normal in (x', z') form

    N = (h x' sin t - x z' cos t, -h x' cos t - x z' sin t, x x') / sqrt(x^2 + h^2 x'^2)

    Raises:
        DegenerateDenominatorError: If x^2 + h^2 x'^2 <= eps
    """
    eps = Config.EPS_REG if eps is None else eps
    _require_finite(x, x_prime, z_prime, h, t)
    squared = x ** 2 + h ** 2 * x_prime ** 2
    if np.any(squared <= eps):
        raise DegenerateDenominatorError(f"normal undefined: x^2 + h^2 x'^2 = {float(np.min(squared))!r}")
    cos_t, sin_t = np.cos(t), np.sin(t)
    components = np.broadcast_arrays(
        h * x_prime * sin_t - x * z_prime * cos_t,
        -h * x_prime * cos_t - x * z_prime * sin_t,
        x * x_prime,
    )
    return np.stack(components, axis=-1) / np.sqrt(squared)[..., np.newaxis]


def normal_theta(state: ProfileState, h: float, t: ArrayLike) -> Vec3:
    """Unit normal in turning-angle form (x' = cos theta, z' = sin theta)."""
    return normal_general(state.x, state.x_prime, state.z_prime, h, t)


def mean_curvature_general(x: ArrayLike, x_prime: ArrayLike, x_second: ArrayLike,
                           z_prime: ArrayLike, z_second: ArrayLike, h: float,
                           eps: float = None) -> ArrayLike:
    """
    Mean curvature in (x', z') form

    H = [(x'z'' - z'x'')(x^3 + h^2 x) + z'(2h^2x'^2 + x^2)] / (h^2x'^2 + x^2)^(3/2)

    Raises:
        DegenerateDenominatorError: If h^2 x'^2 + x^2 <= eps
    """
    eps = Config.EPS_REG if eps is None else eps
    _require_finite(x, x_prime, x_second, z_prime, z_second, h)
    squared = h ** 2 * x_prime ** 2 + x ** 2
    if np.any(squared <= eps):
        raise DegenerateDenominatorError(f"mean curvature undefined: h^2 x'^2 + x^2 = {float(np.min(squared))!r}")
    numerator = ((x_prime * z_second - z_prime * x_second) * (x ** 3 + h ** 2 * x)
                 + z_prime * (2 * h ** 2 * x_prime ** 2 + x ** 2))
    return numerator / squared ** 1.5


def mean_curvature_numerator(state: ProfileState, h: float) -> ArrayLike:
    """x (x^2 + h^2) theta' + sin theta (x^2 + 2 h^2 cos^2 theta)."""
    x, cos_th, sin_th = state.x, state.x_prime, state.z_prime
    return x * (x ** 2 + h ** 2) * state.theta_prime + sin_th * (x ** 2 + 2 * h ** 2 * cos_th ** 2)


def mean_curvature_theta(state: ProfileState, h: float, eps: float = None) -> ArrayLike:
    """
    Mean curvature in turning-angle form

    H = [x (x^2 + h^2) theta' + sin theta (x^2 + 2 h^2 cos^2 theta)] / (x^2 + h^2 cos^2 theta)^(3/2)

    Raises:
        DegenerateDenominatorError: If x^2 + h^2 cos^2 theta <= eps
    """
    eps = Config.EPS_REG if eps is None else eps
    _require_finite(state.x, state.theta, state.theta_prime, h)
    squared = regularity_of_state(state, h)
    if np.any(squared <= eps):
        raise DegenerateDenominatorError(f"mean curvature undefined: x^2 + h^2 cos^2 theta = {float(np.min(squared))!r}")
    return mean_curvature_numerator(state, h) / squared ** 1.5
