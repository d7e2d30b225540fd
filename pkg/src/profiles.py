#!/usr/bin/env python3
"""
Generating Profiles

Planar arc-length curves gamma(s) = (x(s), 0, z(s)) that are swept by the
helicoidal group. Each profile hands out ProfileState samples carrying the
turning angle theta (x' = cos theta, z' = sin theta) and its curvature theta'.

Closed-form variants (vertical line, straight line, circular arc) are exact.
Integrated profiles come from classical fixed-step RK4 on
(x', z', theta') = (cos theta, sin theta, kappa) and are interpolated between
nodes with cubic Hermite splines.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .config import Config

ArrayLike = Union[float, np.ndarray]
CurvatureFunction = Callable[[float, float, float, float], float]

DEFAULT_DOMAIN: Tuple[float, float] = (-10.0, 10.0)


class ProfileError(Exception):
    """Base exception for profile construction and evaluation errors."""
    pass


class ProfileDomainError(ProfileError):
    """Exception raised when a profile is evaluated outside its domain."""
    def __init__(self, message: str, s: Any, domain: Tuple[float, float]):
        super().__init__(message)
        self.s = s
        self.domain = domain


class InvalidInitialStateError(ProfileError):
    """Exception raised for unusable initial data of an integrated profile."""
    pass


@dataclass(frozen=True)
class ProfileState:
    """One arc-length sample of the generating curve.

    Fields are floats for a single sample or equally shaped arrays for a
    batch of samples; every derived quantity broadcasts the same way.
    Closed-form profiles may also carry exact cos_theta / sin_theta, which
    then take precedence over evaluating cos and sin of theta.
    """
    s: ArrayLike
    x: ArrayLike
    z: ArrayLike
    theta: ArrayLike
    theta_prime: ArrayLike
    cos_theta: Optional[ArrayLike] = None
    sin_theta: Optional[ArrayLike] = None

    @property
    def x_prime(self) -> ArrayLike:
        return np.cos(self.theta) if self.cos_theta is None else self.cos_theta

    @property
    def z_prime(self) -> ArrayLike:
        return np.sin(self.theta) if self.sin_theta is None else self.sin_theta

    @property
    def x_second(self) -> ArrayLike:
        return -self.theta_prime * self.z_prime

    @property
    def z_second(self) -> ArrayLike:
        return self.theta_prime * self.x_prime

    def _select(self, convert) -> 'ProfileState':
        return ProfileState(
            s=convert(self.s),
            x=convert(self.x),
            z=convert(self.z),
            theta=convert(self.theta),
            theta_prime=convert(self.theta_prime),
            cos_theta=None if self.cos_theta is None else convert(self.cos_theta),
            sin_theta=None if self.sin_theta is None else convert(self.sin_theta),
        )

    def __getitem__(self, index) -> 'ProfileState':
        """Select samples from a batched state."""
        return self._select(lambda v: np.asarray(v)[index])

    def scalar(self) -> 'ProfileState':
        """Convert a one-sample state to plain floats."""
        return self._select(lambda v: float(np.asarray(v)))

    def __len__(self) -> int:
        return int(np.size(self.s))

    def to_dict(self) -> Dict[str, float]:
        return {
            's': float(self.s),
            'x': float(self.x),
            'z': float(self.z),
            'theta': float(self.theta),
            'theta_prime': float(self.theta_prime),
        }


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ProfileError(f"{name} must be finite, got {value}")
    return value


def _check_domain(domain: Tuple[float, float]) -> Tuple[float, float]:
    start, end = float(domain[0]), float(domain[1])
    if not (math.isfinite(start) and math.isfinite(end)) or not start < end:
        raise ProfileError(f"Profile domain must be a finite interval with start < end, got {domain}")
    return start, end


class Profile(ABC):
    """Abstract generating curve over a closed domain interval."""

    kind: str = 'profile'

    def __init__(self, domain: Tuple[float, float] = DEFAULT_DOMAIN):
        self.domain = _check_domain(domain)
        self.logger = logging.getLogger(self.__class__.__name__)

    def contains(self, s: ArrayLike) -> bool:
        s_arr = np.asarray(s, dtype=float)
        return bool(np.all((s_arr >= self.domain[0]) & (s_arr <= self.domain[1])))

    def _require_domain(self, s: ArrayLike) -> np.ndarray:
        s_arr = np.asarray(s, dtype=float)
        if not np.all(np.isfinite(s_arr)):
            raise ProfileDomainError(f"Non-finite arc-length parameter for {self.kind}", s, self.domain)
        if not self.contains(s_arr):
            raise ProfileDomainError(
                f"s outside {self.kind} domain [{self.domain[0]}, {self.domain[1]}]", s, self.domain
            )
        return s_arr

    def state(self, s: ArrayLike) -> ProfileState:
        """
        Evaluate the profile at one or more arc-length values

        Args:
            s: Arc-length parameter (float or array)

        Returns:
            ProfileState with fields shaped like ``s``

        Raises:
            ProfileDomainError: If any value lies outside the closed domain
        """
        s_arr = self._require_domain(s)
        state = self._evaluate(s_arr)
        if np.ndim(s) == 0:
            return state.scalar()
        return state

    def sample(self, count: int = 33) -> ProfileState:
        """Batched states at ``count`` evenly spaced points of the domain."""
        if count < 2:
            raise ProfileError("sample count must be at least 2")
        return self.state(np.linspace(self.domain[0], self.domain[1], count))

    @abstractmethod
    def _evaluate(self, s: np.ndarray) -> ProfileState:
        """Closed or interpolated evaluation on a validated array."""
        pass

    @abstractmethod
    def describe(self) -> Dict[str, Any]:
        """Parameters that reproduce this profile (used in report headers)."""
        pass

    def label(self) -> str:
        params = ','.join(f"{k}={v}" for k, v in self.describe().items() if k != 'kind')
        return f"{self.kind}:{params}"


class CylinderProfile(Profile):
    """Vertical line x = x0, z = sign*s + z0 (theta = sign*pi/2)."""

    kind = 'cylinder'

    def __init__(self, x0: float, z0: float = 0.0, sign: int = 1,
                 domain: Tuple[float, float] = DEFAULT_DOMAIN):
        super().__init__(domain)
        self.x0 = _finite('x0', x0)
        if self.x0 == 0.0:
            raise ProfileError("cylinder radius x0 must be nonzero")
        self.z0 = _finite('z0', z0)
        if sign not in (1, -1):
            raise ProfileError(f"cylinder sign must be +1 or -1, got {sign}")
        self.sign = int(sign)

    def _evaluate(self, s: np.ndarray) -> ProfileState:
        return ProfileState(
            s=s,
            x=np.full_like(s, self.x0),
            z=self.sign * s + self.z0,
            theta=np.full_like(s, self.sign * math.pi / 2),
            theta_prime=np.zeros_like(s),
            cos_theta=np.zeros_like(s),
            sin_theta=np.full_like(s, float(self.sign)),
        )

    def describe(self) -> Dict[str, Any]:
        return {'kind': self.kind, 'x0': self.x0, 'z0': self.z0, 'sign': self.sign,
                'smin': self.domain[0], 'smax': self.domain[1]}


class LineProfile(Profile):
    """Straight line at constant turning angle theta0 through (x0, z0)."""

    kind = 'line'

    def __init__(self, theta0: float, x0: float, z0: float = 0.0,
                 domain: Tuple[float, float] = DEFAULT_DOMAIN):
        super().__init__(domain)
        self.theta0 = _finite('theta0', theta0)
        self.x0 = _finite('x0', x0)
        self.z0 = _finite('z0', z0)

    def _evaluate(self, s: np.ndarray) -> ProfileState:
        return ProfileState(
            s=s,
            x=self.x0 + s * math.cos(self.theta0),
            z=self.z0 + s * math.sin(self.theta0),
            theta=np.full_like(s, self.theta0),
            theta_prime=np.zeros_like(s),
        )

    def describe(self) -> Dict[str, Any]:
        return {'kind': self.kind, 'theta0': self.theta0, 'x0': self.x0, 'z0': self.z0,
                'smin': self.domain[0], 'smax': self.domain[1]}


class ArcProfile(Profile):
    """Circular arc of constant nonzero curvature kappa."""

    kind = 'arc'

    def __init__(self, kappa: float, theta0: float, x0: float, z0: float = 0.0,
                 domain: Tuple[float, float] = DEFAULT_DOMAIN):
        super().__init__(domain)
        self.kappa = _finite('kappa', kappa)
        # Below this the closed form loses digits; use LineProfile instead
        if abs(self.kappa) < 1e-8:
            raise ProfileError("arc curvature must satisfy |kappa| >= 1e-8")
        self.theta0 = _finite('theta0', theta0)
        self.x0 = _finite('x0', x0)
        self.z0 = _finite('z0', z0)

    def _evaluate(self, s: np.ndarray) -> ProfileState:
        theta = self.theta0 + self.kappa * s
        return ProfileState(
            s=s,
            x=self.x0 + (np.sin(theta) - math.sin(self.theta0)) / self.kappa,
            z=self.z0 - (np.cos(theta) - math.cos(self.theta0)) / self.kappa,
            theta=theta,
            theta_prime=np.full_like(s, self.kappa),
        )

    def describe(self) -> Dict[str, Any]:
        return {'kind': self.kind, 'kappa': self.kappa, 'theta0': self.theta0, 'x0': self.x0,
                'z0': self.z0, 'smin': self.domain[0], 'smax': self.domain[1]}


@dataclass
class IntegrationResult:
    """Raw RK4 trajectory"""
    s: np.ndarray
    x: np.ndarray
    z: np.ndarray
    theta: np.ndarray
    theta_prime: np.ndarray
    truncated: bool = False
    truncation_reason: Optional[str] = None


def rk4_integrate(curvature: CurvatureFunction,
                  s0: float, x0: float, z0: float, theta0: float,
                  step: float, n_steps: int,
                  stop: Optional[Callable[[float, float, float, float], Optional[str]]] = None) -> IntegrationResult:
    """
    Classical fixed-step RK4 on (x', z', theta') = (cos theta, sin theta, kappa(s, x, z, theta))

    Args:
        curvature: kappa as a function of (s, x, z, theta)
        s0, x0, z0, theta0: Initial data
        step: Arc-length step (> 0)
        n_steps: Number of steps to attempt
        stop: Optional predicate returning a reason string when the new node
            is inadmissible; integration halts before that node

    Returns:
        IntegrationResult with at least the initial node
    """
    if not (step > 0 and math.isfinite(step)):
        raise InvalidInitialStateError(f"step must be positive and finite, got {step}")
    if n_steps < 1:
        raise InvalidInitialStateError(f"n_steps must be at least 1, got {n_steps}")

    def rhs(s: float, y: np.ndarray) -> np.ndarray:
        if not math.isfinite(y[2]):
            return np.full(3, np.nan)
        return np.array([math.cos(y[2]), math.sin(y[2]), curvature(s, y[0], y[1], y[2])])

    y = np.array([x0, z0, theta0], dtype=float)
    kappa0 = float(curvature(s0, x0, z0, theta0))
    if not math.isfinite(kappa0):
        raise InvalidInitialStateError("curvature is not finite at the initial state")

    s_nodes = [s0]
    y_nodes = [y.copy()]
    k_nodes = [kappa0]
    truncated = False
    reason = None

    for i in range(n_steps):
        s = s0 + i * step
        k1 = rhs(s, y)
        k2 = rhs(s + step / 2, y + k1 * step / 2)
        k3 = rhs(s + step / 2, y + k2 * step / 2)
        k4 = rhs(s + step, y + k3 * step)
        y_next = y + (k1 + 2 * k2 + 2 * k3 + k4) * step / 6
        s_next = s0 + (i + 1) * step

        if not np.all(np.isfinite(y_next)):
            truncated, reason = True, f"non-finite state after step {i + 1}"
            break
        if stop is not None:
            reason = stop(s_next, y_next[0], y_next[1], y_next[2])
            if reason:
                truncated = True
                break
        kappa_next = float(curvature(s_next, y_next[0], y_next[1], y_next[2]))
        if not math.isfinite(kappa_next):
            truncated, reason = True, f"non-finite curvature after step {i + 1}"
            break

        y = y_next
        s_nodes.append(s_next)
        y_nodes.append(y.copy())
        k_nodes.append(kappa_next)

    nodes = np.array(y_nodes)
    return IntegrationResult(
        s=np.array(s_nodes),
        x=nodes[:, 0],
        z=nodes[:, 1],
        theta=nodes[:, 2],
        theta_prime=np.array(k_nodes),
        truncated=truncated,
        truncation_reason=reason,
    )


class IntegratedProfile(Profile):
    """Profile produced by RK4, interpolated between nodes by cubic Hermite splines.

    At nodes the state is the RK4 node with theta' = kappa(node). Between
    nodes (x, z, theta) come from the Hermite interpolant built on
    derivatives (cos theta, sin theta, kappa) and theta' is the derivative of
    the theta interpolant.
    """

    kind = 'integrated'

    def __init__(self, result: IntegrationResult, step: float,
                 params: Optional[Dict[str, Any]] = None):
        if len(result.s) < 2:
            raise ProfileError(
                f"integrated profile needs at least two nodes ({result.truncation_reason or 'no steps taken'})"
            )
        super().__init__((float(result.s[0]), float(result.s[-1])))
        self.result = result
        self.step = float(step)
        self.params = dict(params or {})
        values = np.column_stack([result.x, result.z, result.theta])
        slopes = np.column_stack([np.cos(result.theta), np.sin(result.theta), result.theta_prime])
        self._spline = CubicHermiteSpline(result.s, values, slopes, axis=0)
        self._spline_prime = self._spline.derivative()

    @property
    def truncated(self) -> bool:
        return self.result.truncated

    @property
    def nodes(self) -> ProfileState:
        """Exact RK4 nodes as a batched state."""
        r = self.result
        return ProfileState(s=r.s.copy(), x=r.x.copy(), z=r.z.copy(),
                            theta=r.theta.copy(), theta_prime=r.theta_prime.copy())

    def _evaluate(self, s: np.ndarray) -> ProfileState:
        values = self._spline(s)
        slopes = self._spline_prime(s)
        return ProfileState(
            s=s,
            x=values[..., 0],
            z=values[..., 1],
            theta=values[..., 2],
            theta_prime=slopes[..., 2],
        )

    def describe(self) -> Dict[str, Any]:
        described = {'kind': self.kind, 'step': self.step, 'nodes': int(len(self.result.s)),
                     'truncated': self.truncated}
        described.update(self.params)
        return described


def piecewise_constant_curvature(values: Sequence[float], segment_length: float,
                                 s0: float = 0.0) -> CurvatureFunction:
    """
    Curvature function that is constant on consecutive segments

    Args:
        values: Curvature on each segment
        segment_length: Arc length of every segment
        s0: Start of the first segment

    Returns:
        kappa(s, x, z, theta); beyond the last segment the last value is kept
    """
    if not values:
        raise ProfileError("piecewise curvature needs at least one segment")
    if not segment_length > 0:
        raise ProfileError("segment_length must be positive")
    kappas = tuple(float(v) for v in values)
    last = len(kappas) - 1

    def curvature(s: float, x: float, z: float, theta: float) -> float:
        index = int(math.floor((s - s0) / segment_length + 1e-9))
        return kappas[min(max(index, 0), last)]

    return curvature


def integrate_profile(curvature: CurvatureFunction, x0: float, z0: float, theta0: float,
                      length: float, step: Optional[float] = None, s0: float = 0.0,
                      params: Optional[Dict[str, Any]] = None) -> IntegratedProfile:
    """
    Integrate a profile of given length from a curvature function

    Args:
        curvature: kappa(s, x, z, theta)
        x0, z0, theta0: Initial point and turning angle
        length: Arc length to cover
        step: RK4 step (defaults to Config.RK4_STEP)
        s0: Initial arc-length value
        params: Descriptor parameters stored for report headers

    Returns:
        IntegratedProfile over [s0, s0 + length]
    """
    step = Config.RK4_STEP if step is None else float(step)
    if not length > 0:
        raise InvalidInitialStateError(f"profile length must be positive, got {length}")
    n_steps = max(1, int(round(length / step)))
    result = rk4_integrate(curvature, s0, _finite('x0', x0), _finite('z0', z0), _finite('theta0', theta0),
                           length / n_steps, n_steps)
    return IntegratedProfile(result, length / n_steps, params)


def piecewise_profile(kappas: Sequence[float], segment_length: float, x0: float, z0: float,
                      theta0: float, step: Optional[float] = None) -> IntegratedProfile:
    """
    Integrated profile with piecewise-constant curvature, starting at s = 0

    Each segment is integrated on its own so that no RK4 stage straddles a
    curvature jump; junction nodes carry the curvature of the segment ending there.
    """
    curvature = piecewise_constant_curvature(kappas, segment_length)
    step = Config.RK4_STEP if step is None else float(step)
    per_segment = max(1, int(round(segment_length / step)))
    segment_step = segment_length / per_segment
    params = {
        'kappas': ';'.join(repr(float(k)) for k in kappas),
        'length': float(segment_length),
        'x0': float(x0), 'z0': float(z0), 'theta0': float(theta0),
    }

    x, z, theta = _finite('x0', x0), _finite('z0', z0), _finite('theta0', theta0)
    pieces = []
    for index in range(len(kappas)):
        start = index * segment_length
        kappa = curvature(start, x, z, theta)
        part = rk4_integrate(lambda s, px, pz, pt, k=kappa: k, start, x, z, theta,
                             segment_step, per_segment)
        pieces.append(part)
        x, z, theta = float(part.x[-1]), float(part.z[-1]), float(part.theta[-1])
        if part.truncated:
            break

    def joined(name: str) -> np.ndarray:
        arrays = [getattr(pieces[0], name)] + [getattr(p, name)[1:] for p in pieces[1:]]
        return np.concatenate(arrays)

    result = IntegrationResult(
        s=joined('s'), x=joined('x'), z=joined('z'), theta=joined('theta'),
        theta_prime=joined('theta_prime'),
        truncated=pieces[-1].truncated,
        truncation_reason=pieces[-1].truncation_reason,
    )
    profile = IntegratedProfile(result, segment_step, params)
    profile.kind = 'piecewise'
    return profile
