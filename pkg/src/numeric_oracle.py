#!/usr/bin/env python3
"""
Finite-Difference Oracle

Independent second-order central-difference evaluation of the
parametrization's jet, the cross-product normal and the mean curvature,
used to cross-check every closed form in geometry.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .config import Config
from .geometry import FundamentalForms, HelicoidalSurface, SurfaceJet, normal_theta, parametrize
from .profiles import LineProfile, ProfileDomainError

logger = logging.getLogger(__name__)


class OracleError(Exception):
    """Base exception for finite-difference oracle errors."""
    pass


class FDConfigError(OracleError):
    """Exception raised for an invalid finite-difference configuration."""
    pass


class StencilError(OracleError):
    """Exception raised when the stencil leaves the domain or degenerates."""
    pass


@dataclass(frozen=True)
class FDConfig:
    """Central-difference steps.

    ``step`` drives first partials; ``curvature_step`` drives second partials,
    where a 1e-5 step would be roundoff-dominated.
    """
    step: float = field(default_factory=lambda: Config.FD_STEP)
    curvature_step: float = field(default_factory=lambda: Config.FD_CURVATURE_STEP)
    scheme: str = 'central-2'

    def __post_init__(self):
        for name in ('step', 'curvature_step'):
            value = getattr(self, name)
            if not (0 < value < 1e-2):
                raise FDConfigError(f"{name} must lie in (0, 1e-2), got {value}")
        if self.scheme != 'central-2':
            raise FDConfigError(f"unsupported scheme: {self.scheme}")

    @property
    def reach(self) -> float:
        """Largest offset from s touched by any stencil."""
        return 2 * max(self.step, self.curvature_step)


def fd_jet(surface: HelicoidalSurface, s: float, t: float, cfg: FDConfig = None) -> SurfaceJet:
    """
    Central-difference partials of the parametrization

    Raises:
        StencilError: If s +/- 2 step leaves the profile domain
    """
    cfg = cfg or FDConfig()
    if not surface.profile.contains([s - cfg.reach, s + cfg.reach]):
        raise StencilError(f"stencil around s={s} leaves domain {surface.profile.domain}")

    def psi(ds: float, dt: float) -> np.ndarray:
        return parametrize(surface, s + ds, t + dt)

    d1, d2 = cfg.step, cfg.curvature_step
    try:
        center = psi(0.0, 0.0)
        psi_s = (psi(d1, 0.0) - psi(-d1, 0.0)) / (2 * d1)
        psi_t = (psi(0.0, d1) - psi(0.0, -d1)) / (2 * d1)
        psi_ss = (psi(d2, 0.0) - 2 * center + psi(-d2, 0.0)) / d2 ** 2
        psi_tt = (psi(0.0, d2) - 2 * center + psi(0.0, -d2)) / d2 ** 2
        psi_st = (psi(d2, d2) - psi(d2, -d2) - psi(-d2, d2) + psi(-d2, -d2)) / (4 * d2 ** 2)
    except ProfileDomainError as e:
        raise StencilError(f"domain underrun in stencil: {e}")

    return SurfaceJet(point=center, psi_s=psi_s, psi_t=psi_t, psi_ss=psi_ss, psi_st=psi_st, psi_tt=psi_tt)


def fd_normal(jet: SurfaceJet) -> np.ndarray:
    """Normalized Psi_s x Psi_t."""
    cross = np.cross(jet.psi_s, jet.psi_t)
    norm = float(np.linalg.norm(cross))
    if norm == 0.0:
        raise StencilError("Psi_s and Psi_t are parallel")
    return cross / norm


def fd_fundamental_forms(surface: HelicoidalSurface, s: float, t: float, cfg: FDConfig = None) -> FundamentalForms:
    """E, F, G, e, f, g from the finite-difference jet and cross-product normal."""
    jet = fd_jet(surface, s, t, cfg)
    normal = fd_normal(jet)
    return FundamentalForms(
        E=float(jet.psi_s @ jet.psi_s),
        F=float(jet.psi_s @ jet.psi_t),
        G=float(jet.psi_t @ jet.psi_t),
        e=float(jet.psi_ss @ normal),
        f=float(jet.psi_st @ normal),
        g=float(jet.psi_tt @ normal),
    )


def fd_mean_curvature(surface: HelicoidalSurface, s: float, t: float, cfg: FDConfig = None) -> float:
    """
    (eG - 2fF + gE) / (EG - F^2) from finite differences, oriented by Psi_s x Psi_t

    Raises:
        StencilError: If EG - F^2 <= Config.EPS_REG at the stencil
    """
    forms = fd_fundamental_forms(surface, s, t, cfg)
    if forms.determinant <= Config.EPS_REG:
        raise StencilError(f"degenerate stencil: EG - F^2 = {forms.determinant!r}")
    return forms.mean_curvature() * orientation_sign()


@lru_cache(maxsize=1)
def orientation_sign() -> float:
    """Sign relating the closed-form normal to Psi_s x Psi_t, fixed once per process."""
    surface = HelicoidalSurface(LineProfile(theta0=0.5, x0=1.3), pitch=0.9)
    jet = fd_jet(surface, 0.0, 1.1, FDConfig(step=1e-5, curvature_step=1e-3))
    closed = normal_theta(surface.profile.state(0.0), surface.pitch, 1.1)
    sign = float(np.sign(closed @ fd_normal(jet)))
    logger.info(f"Orientation sign of closed-form normal vs Psi_s x Psi_t: {sign:+.0f}")
    return sign


def convergence_order(errors: Sequence[float], ratio: float = 2.0) -> float:
    """
    Observed order from errors at steps shrinking by ``ratio``

    Returns the mean of log(e_i / e_{i+1}) / log(ratio).
    """
    errs = [float(e) for e in errors]
    if len(errs) < 2 or any(not e > 0 for e in errs):
        raise OracleError("need at least two positive errors to measure an order")
    orders = [math.log(a / b) / math.log(ratio) for a, b in zip(errs, errs[1:])]
    return sum(orders) / len(orders)
