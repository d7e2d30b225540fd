#!/usr/bin/env python3
"""
Singular Minimal Residuals

Evaluates H - alpha <N, v> / <p, v> on helicoidal surfaces, its
denominator-free form

    F(s, t) = numH * <p, v> - alpha * (numN . v) * (x^2 + h^2 cos^2 theta)

and the expansion F = A0 + A1 t + A2 sin t + A3 cos t whose coefficients
must all vanish on a singular minimal helicoidal surface.

Sign conventions (measured against the numeric extraction, which is the
ground truth for every coefficient path):
    GENERAL_PATH_SIGN      closed-form quadruple vs extracted quadruple
    VERTICAL_PATH_FACTOR   general quadruple at v = (0,0,1) vs (A0, A1) pair
    COMBO_HA0_ZA1_SIGN     h A0 - z A1 vs alpha h v3 x cos(theta) D
    COMBO_V2A3_V1A2_SIGN   v2 A3 - v1 A2 vs (v1^2 + v2^2) alpha h cos(theta) D
"""

import logging
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .config import Config
from .geometry import (
    GeometryError,
    HelicoidalSurface,
    NonFiniteInputError,
    as_unit_vec3,
    mean_curvature_numerator,
    regularity_of_state,
)
from .profiles import ArrayLike, ProfileState

logger = logging.getLogger(__name__)

GENERAL_PATH_SIGN = 1.0
VERTICAL_PATH_FACTOR = 1.0
COMBO_HA0_ZA1_SIGN = -1.0
COMBO_V2A3_V1A2_SIGN = 1.0

DEFAULT_T_NODES: Tuple[float, float, float, float] = (0.0, math.pi / 3, math.pi / 2, 1.0)


class ResidualError(Exception):
    """Base exception for residual evaluation errors."""
    pass


class InvalidParamsError(ResidualError):
    """Exception raised for an unusable (alpha, v) pair."""
    pass


class HalfspaceError(ResidualError):
    """Exception raised when <p, v> is not safely positive."""
    def __init__(self, message: str, value: float, threshold: float):
        super().__init__(message)
        self.value = value
        self.threshold = threshold


class IllConditionedNodesError(ResidualError):
    """Exception raised when the extraction basis matrix is (nearly) singular."""
    def __init__(self, message: str, condition_number: float):
        super().__init__(message)
        self.condition_number = condition_number


@dataclass(frozen=True)
class SMSParams:
    """The exponent alpha (nonzero) and unit direction v of the singular minimal equation."""
    alpha: float
    direction: Tuple[float, float, float]

    def __post_init__(self):
        if not math.isfinite(self.alpha) or self.alpha == 0.0:
            raise InvalidParamsError(f"alpha must be finite and nonzero, got {self.alpha}")
        try:
            unit = as_unit_vec3(self.direction)
        except GeometryError as e:
            raise InvalidParamsError(f"direction must be a unit vector: {e}")
        object.__setattr__(self, 'direction', tuple(float(c) for c in unit))

    @property
    def v(self) -> np.ndarray:
        return np.array(self.direction)

    def to_dict(self):
        return {'alpha': self.alpha, 'direction': list(self.direction)}


@dataclass(frozen=True)
class CoefficientQuadruple:
    """Coefficients of F in the basis {1, t, sin t, cos t}."""
    A0: ArrayLike
    A1: ArrayLike
    A2: ArrayLike
    A3: ArrayLike

    def evaluate(self, t: ArrayLike) -> ArrayLike:
        """A0 + A1 t + A2 sin t + A3 cos t."""
        return self.A0 + self.A1 * t + self.A2 * np.sin(t) + self.A3 * np.cos(t)

    def as_array(self) -> np.ndarray:
        """Shape (4,) for one sample, (4, ...) when any coefficient is batched."""
        fields = (self.A0, self.A1, self.A2, self.A3)
        return np.stack(np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in fields)))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.as_array())))

    def scaled(self, factor: float) -> 'CoefficientQuadruple':
        return CoefficientQuadruple(factor * self.A0, factor * self.A1, factor * self.A2, factor * self.A3)

    def to_dict(self):
        return {'A0': float(self.A0), 'A1': float(self.A1), 'A2': float(self.A2), 'A3': float(self.A3)}


def _position_dot_v(state: ProfileState, h: float, v: np.ndarray, t: ArrayLike) -> ArrayLike:
    """<Psi(s, t), v> = (h t + z) v3 + x (v1 cos t + v2 sin t)."""
    return (h * t + state.z) * v[2] + state.x * (v[0] * np.cos(t) + v[1] * np.sin(t))


def _normal_numerator_dot_v(state: ProfileState, h: float, v: np.ndarray, t: ArrayLike) -> ArrayLike:
    """Unnormalized normal projected on v."""
    cos_th, sin_th = state.x_prime, state.z_prime
    x = state.x
    return (cos_th * (v[2] * x + h * v[0] * np.sin(t) - h * v[1] * np.cos(t))
            - x * sin_th * (v[0] * np.cos(t) + v[1] * np.sin(t)))


def residual(surface: HelicoidalSurface, params: SMSParams, s: float, t: float) -> float:
    """
    H - alpha <N, v> / <p, v> at Psi(s, t)

    Evaluated as F / (D^(3/2) <p, v>) with D = x^2 + h^2 cos^2 theta, so the
    curvature and normal terms share their rounding.

    Raises:
        RegularityError: If EG - F^2 <= eps_reg
        HalfspaceError: If <Psi(s, t), v> <= Config.EPS_HALF
    """
    if not math.isfinite(t):
        raise NonFiniteInputError(f"motion parameter must be finite, got {t}")
    state = surface.require_regular(s)
    h = surface.pitch
    p_dot_v = float(_position_dot_v(state, h, params.v, t))
    if p_dot_v <= Config.EPS_HALF:
        raise HalfspaceError(
            f"point outside halfspace: <p, v> = {p_dot_v!r} <= {Config.EPS_HALF!r}", p_dot_v, Config.EPS_HALF
        )
    D = regularity_of_state(state, h)
    return float(cleared_residual(state, h, params, t) / (D ** 1.5 * p_dot_v))


def cleared_residual(state: ProfileState, h: float, params: SMSParams, t: ArrayLike) -> ArrayLike:
    """
    Denominator-free residual F(s, t)

    Defined everywhere (also where <p, v> <= 0); affine-trigonometric in t.
    """
    v = params.v
    D = regularity_of_state(state, h)
    return (mean_curvature_numerator(state, h) * _position_dot_v(state, h, v, t)
            - params.alpha * _normal_numerator_dot_v(state, h, v, t) * D)


def coefficients_general(state: ProfileState, h: float, params: SMSParams) -> CoefficientQuadruple:
    """
    Closed-form A0..A3 for an arbitrary unit direction v = (v1, v2, v3)

    A0 = v3 (z numH - alpha x cos(theta) D)
    A1 = h v3 numH
    A2 = (x numH + alpha x sin(theta) D) v2 - alpha h cos(theta) D v1
    A3 = (x numH + alpha x sin(theta) D) v1 + alpha h cos(theta) D v2
    """
    v1, v2, v3 = params.direction
    alpha = params.alpha
    x, z = state.x, state.z
    cos_th, sin_th = state.x_prime, state.z_prime
    num_h = mean_curvature_numerator(state, h)
    D = regularity_of_state(state, h)

    lateral = x * num_h + alpha * x * sin_th * D
    twist = alpha * h * cos_th * D
    return CoefficientQuadruple(
        A0=v3 * (z * num_h - alpha * x * cos_th * D),
        A1=h * v3 * num_h,
        A2=lateral * v2 - twist * v1,
        A3=lateral * v1 + twist * v2,
    )


def coefficients_vertical(state: ProfileState, h: float, alpha: float) -> Tuple[ArrayLike, ArrayLike]:
    """(A0, A1) of the degree-one polynomial in t for v = (0, 0, 1)."""
    num_h = mean_curvature_numerator(state, h)
    D = regularity_of_state(state, h)
    A0 = state.z * num_h - alpha * state.x * state.x_prime * D
    A1 = h * num_h
    return A0, A1


def cylinder_coefficients(x0: float, z: ArrayLike, h: float, params: SMSParams) -> CoefficientQuadruple:
    """Quadruple on the upward cylinder x = x0, theta = pi/2:
    (x0^2 z v3, x0^2 h v3, x0^3 v2 (1 + alpha), x0^3 v1 (1 + alpha))."""
    v1, v2, v3 = params.direction
    return CoefficientQuadruple(
        A0=x0 ** 2 * z * v3,
        A1=x0 ** 2 * h * v3,
        A2=x0 ** 3 * v2 * (1 + params.alpha),
        A3=x0 ** 3 * v1 * (1 + params.alpha),
    )


def combo_hA0_zA1(state: ProfileState, h: float, params: SMSParams) -> ArrayLike:
    """h A0 - z A1 from the closed-form quadruple."""
    quad = coefficients_general(state, h, params)
    return h * quad.A0 - state.z * quad.A1


def combo_v2A3_v1A2(state: ProfileState, h: float, params: SMSParams) -> ArrayLike:
    """v2 A3 - v1 A2 from the closed-form quadruple."""
    v1, v2, _ = params.direction
    quad = coefficients_general(state, h, params)
    return v2 * quad.A3 - v1 * quad.A2


def printed_combo_hA0_zA1(state: ProfileState, h: float, params: SMSParams) -> ArrayLike:
    """alpha h v3 x cos(theta) (x^2 + h^2 cos^2 theta)."""
    D = regularity_of_state(state, h)
    return params.alpha * h * params.direction[2] * state.x * state.x_prime * D


def printed_combo_v2A3_v1A2(state: ProfileState, h: float, params: SMSParams) -> ArrayLike:
    """(v1^2 + v2^2) alpha h cos(theta) (x^2 + h^2 cos^2 theta)."""
    v1, v2, _ = params.direction
    D = regularity_of_state(state, h)
    return (v1 ** 2 + v2 ** 2) * params.alpha * h * state.x_prime * D


def basis_matrix(t_nodes: Sequence[float]) -> np.ndarray:
    """Rows [1, t, sin t, cos t] for each node."""
    t = np.asarray(t_nodes, dtype=float)
    return np.column_stack([np.ones_like(t), t, np.sin(t), np.cos(t)])


def extract_coefficients_numeric(state: ProfileState, h: float, params: SMSParams,
                                 t_nodes: Sequence[float] = DEFAULT_T_NODES) -> CoefficientQuadruple:
    """
    Recover A0..A3 by solving F(s, t_i) = A0 + A1 t_i + A2 sin t_i + A3 cos t_i

    Args:
        state: A single profile state
        h: Pitch
        params: (alpha, v)
        t_nodes: Four distinct motion parameters

    Returns:
        CoefficientQuadruple fitted through the four nodes

    Raises:
        IllConditionedNodesError: If the basis matrix condition number reaches Config.COND_LIMIT
    """
    nodes = tuple(float(t) for t in t_nodes)
    if len(nodes) != 4 or len(set(nodes)) != 4:
        raise IllConditionedNodesError(f"need four distinct t nodes, got {t_nodes}", math.inf)
    matrix = basis_matrix(nodes)
    condition = float(np.linalg.cond(matrix))
    if not condition < Config.COND_LIMIT:
        raise IllConditionedNodesError(
            f"basis matrix condition number {condition:.3e} exceeds {Config.COND_LIMIT:.1e}", condition
        )
    values = np.array([cleared_residual(state, h, params, t) for t in nodes], dtype=float)
    solution = np.linalg.solve(matrix, values)
    logger.debug(f"Extracted coefficients {solution} (cond={condition:.3e})")
    return CoefficientQuadruple(*(float(a) for a in solution))
