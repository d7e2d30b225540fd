#!/usr/bin/env python3
"""
Helicoidal Classification Checks

Machine checks of the two classification statements for helicoidal
singular minimal surfaces:

- vertical direction v = (0, 0, 1) forces h = 0 (check_prop1);
- for h != 0 only the circular cylinder about the twist axis with
  alpha = -1 and v orthogonal to the axis is singular minimal
  (certify_cylinder, falsification_search).

The falsification search is evidence, not proof: it scores every grid cell
(h, alpha, v) by the smallest, over a family of piecewise-constant curvature
profiles, of the sampled max |F(s, t)| and records the observed minima.
"""

import asyncio
import itertools
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import yaml

from .config import Config
from .geometry import regularity_of_state
from .profiles import (
    CylinderProfile,
    IntegratedProfile,
    Profile,
    ProfileState,
    piecewise_profile,
)
from .residuals import SMSParams, coefficients_general, coefficients_vertical, cylinder_coefficients

logger = logging.getLogger(__name__)

TWO_PI = 2 * math.pi


class ClassifierError(Exception):
    """Base exception for classification errors."""
    pass


class SearchGridError(ClassifierError):
    """Exception raised for empty, invalid or fully skipped search grids."""
    pass


class TheoremInconsistencyError(ClassifierError):
    """Exception raised when computed results contradict the classification."""
    def __init__(self, message: str, violations: List[str]):
        super().__init__(message)
        self.violations = violations


class Verdict(Enum):
    """Certification verdicts"""
    SINGULAR_MINIMAL = "SingularMinimal"
    NOT_SINGULAR_MINIMAL = "NotSingularMinimal"
    DEGENERATE = "Degenerate"


@dataclass
class Witness:
    """Sample where |F| is largest"""
    s: float
    t: float
    F: float
    coefficients: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        data = {'s': self.s, 't': self.t, 'F': self.F}
        if self.coefficients:
            data['coefficients'] = dict(self.coefficients)
        return data


@dataclass
class CertificationReport:
    """Result of certifying one configuration"""
    case_label: str
    coefficient_magnitudes: Dict[str, float]
    verdict: Verdict
    witnesses: List[Witness] = field(default_factory=list)
    subcase: Optional[str] = None
    parameters: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'case': self.case_label,
            'verdict': self.verdict.value,
            'subcase': self.subcase,
            'coefficient_magnitudes': dict(self.coefficient_magnitudes),
            'witnesses': [w.to_dict() for w in self.witnesses],
            'parameters': dict(self.parameters),
        }


def _t_samples(count: int = 25) -> np.ndarray:
    return np.linspace(0.0, TWO_PI, count)


def _evaluate_on_samples(quad, shape: Tuple[int, ...], t_values: np.ndarray) -> np.ndarray:
    """A0 + A1 t + A2 sin t + A3 cos t with coefficients of ``shape`` against a trailing t axis."""
    def expand(a):
        return np.broadcast_to(np.asarray(a, dtype=float), shape)[..., np.newaxis]
    return (expand(quad.A0) + expand(quad.A1) * t_values + expand(quad.A2) * np.sin(t_values)
            + expand(quad.A3) * np.cos(t_values))


def _argmax_witness(F: np.ndarray) -> Tuple[int, ...]:
    flat = int(np.argmax(np.abs(F)))
    return np.unravel_index(flat, F.shape)


def certify_cylinder(x0: float, z0: float, sign: int, h: float, alpha: float,
                     v: Sequence[float], s_samples: Optional[Sequence[float]] = None,
                     tol_zero: Optional[float] = None) -> CertificationReport:
    """
    Certify the circular cylinder x = x0 swept with pitch h

    Evaluates the closed-form quadruple (x0^2 z v3, x0^2 h v3, x0^3 v2 (1 + alpha),
    x0^3 v1 (1 + alpha)) on the z-values of the profile (the quadruple of the
    downward cylinder is its negative). Verdict SingularMinimal iff every
    coefficient magnitude is below tol_zero.

    Raises:
        ProfileError: If x0 = 0 or sign is not +/-1
    """
    tol_zero = Config.TOL_ZERO if tol_zero is None else tol_zero
    profile = CylinderProfile(x0=x0, z0=z0, sign=sign)
    params = SMSParams(alpha=alpha, direction=tuple(v))
    s_values = np.asarray(s_samples if s_samples is not None else np.linspace(-2.0, 2.0, 9), dtype=float)
    states = profile.state(s_values)

    quad = cylinder_coefficients(profile.x0, states.z, h, params).scaled(float(sign))
    magnitudes = {name: float(np.max(np.abs(np.broadcast_to(getattr(quad, name), s_values.shape))))
                  for name in ('A0', 'A1', 'A2', 'A3')}
    verdict = (Verdict.SINGULAR_MINIMAL if all(m < tol_zero for m in magnitudes.values())
               else Verdict.NOT_SINGULAR_MINIMAL)

    t_values = _t_samples()
    F = _evaluate_on_samples(quad, s_values.shape, t_values)
    i, j = _argmax_witness(F)
    witness = Witness(s=float(s_values[i]), t=float(t_values[j]), F=float(F[i, j]))

    report = CertificationReport(
        case_label='cylinder',
        coefficient_magnitudes=magnitudes,
        verdict=verdict,
        witnesses=[witness],
        subcase='cos theta = 0',
        parameters={'x0': profile.x0, 'z0': profile.z0, 'sign': profile.sign, 'h': h,
                    'alpha': alpha, 'v': list(params.direction), 'tol_zero': tol_zero},
    )
    logger.debug(f"Cylinder certification {report.parameters}: {verdict.value}")
    return report


def _profile_states(profile: Profile, sample_count: int = 33) -> ProfileState:
    if isinstance(profile, IntegratedProfile):
        return profile.nodes
    return profile.sample(sample_count)


def check_prop1(profile: Profile, h: float, alpha: float, tol_zero: Optional[float] = None,
                sample_count: int = 33) -> CertificationReport:
    """
    Check a helicoidal surface with v = (0, 0, 1) and h != 0 along its profile

    Computes (A0, A1) at every sample, reports the sub-case (x = 0,
    cos theta = 0 or generic) and a witness where |A0 + A1 t| is largest.

    Raises:
        ClassifierError: If h = 0
    """
    if h == 0:
        raise ClassifierError("check_prop1 requires a nonzero pitch")
    tol_zero = Config.TOL_ZERO if tol_zero is None else tol_zero
    states = _profile_states(profile, sample_count)
    A0, A1 = coefficients_vertical(states, h, alpha)
    A0 = np.broadcast_to(A0, np.shape(states.s))
    A1 = np.broadcast_to(A1, np.shape(states.s))

    if float(np.max(np.abs(states.x))) < tol_zero:
        subcase = 'x = 0'
    elif float(np.max(np.abs(states.x_prime))) < tol_zero:
        subcase = 'cos theta = 0'
    else:
        subcase = 'generic'

    magnitudes = {'A0': float(np.max(np.abs(A0))), 'A1': float(np.max(np.abs(A1)))}
    if np.any(regularity_of_state(states, h) <= Config.EPS_REG):
        verdict = Verdict.DEGENERATE
    elif all(m < tol_zero for m in magnitudes.values()):
        verdict = Verdict.SINGULAR_MINIMAL
    else:
        verdict = Verdict.NOT_SINGULAR_MINIMAL

    t_values = _t_samples()
    F = A0[:, np.newaxis] + A1[:, np.newaxis] * t_values[np.newaxis, :]
    i, j = _argmax_witness(F)
    witness = Witness(
        s=float(states.s[i]), t=float(t_values[j]), F=float(F[i, j]),
        coefficients={'A0': float(A0[i]), 'A1': float(A1[i])},
    )
    if verdict is Verdict.SINGULAR_MINIMAL:
        logger.error(f"Vertical-direction check certified {profile.label()} with h={h}")

    return CertificationReport(
        case_label='vertical-direction',
        coefficient_magnitudes=magnitudes,
        verdict=verdict,
        witnesses=[witness],
        subcase=subcase,
        parameters={'profile': profile.describe(), 'h': h, 'alpha': alpha, 'tol_zero': tol_zero},
    )


def sphere_directions_26() -> List[Tuple[float, float, float]]:
    """Normalized nonzero points of {-1, 0, 1}^3 in lexicographic order."""
    directions = []
    for point in itertools.product((-1, 0, 1), repeat=3):
        if point == (0, 0, 0):
            continue
        norm = math.sqrt(sum(c * c for c in point))
        directions.append(tuple(c / norm for c in point))
    return directions


@dataclass
class FamilyMember:
    """One profile of the search family with its sampled states"""
    label: str
    states: ProfileState
    is_cylinder: bool


@dataclass
class SearchGrid:
    """Falsification grid: piecewise-constant curvature family x (h, alpha, v)"""
    curvature_values: List[float]
    segment_count: int
    segment_length: float
    x0_values: List[float]
    z0_values: List[float]
    theta0_values: List[float]
    pitches: List[float]
    alphas: List[float]
    directions: List[Tuple[float, float, float]]
    step: float = 0.01
    sample_stride: int = 10
    t_samples: int = 16
    batch_size: int = field(default_factory=lambda: Config.WORKERS)

    def validate(self) -> None:
        """
        Raises:
            SearchGridError: If any axis is empty or a pitch is zero
        """
        axes = {
            'curvature_values': self.curvature_values, 'x0_values': self.x0_values,
            'z0_values': self.z0_values, 'theta0_values': self.theta0_values,
            'pitches': self.pitches, 'alphas': self.alphas, 'directions': self.directions,
        }
        for name, values in axes.items():
            if not values:
                raise SearchGridError(f"search grid axis '{name}' is empty")
        if self.segment_count < 1 or self.segment_length <= 0:
            raise SearchGridError("segment_count must be >= 1 and segment_length > 0")
        if any(h == 0 for h in self.pitches):
            raise SearchGridError("all pitches must be nonzero")
        if any(a == 0 for a in self.alphas):
            raise SearchGridError("alpha = 0 is excluded")
        if self.sample_stride < 1 or self.t_samples < 2 or self.batch_size < 1:
            raise SearchGridError("sample_stride, t_samples and batch_size must be positive")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SearchGrid':
        """Build a grid from a mapping (YAML or JSON)."""
        family = data.get('profile_family', {})
        directions = data.get('directions', 'sphere26')
        if directions == 'sphere26':
            directions = sphere_directions_26()
        else:
            directions = [tuple(float(c) for c in d) for d in directions]
            for d in directions:
                norm = math.sqrt(sum(c * c for c in d))
                if len(d) != 3 or norm == 0:
                    raise SearchGridError(f"invalid direction {d}")
            directions = [tuple(c / math.sqrt(sum(k * k for k in d)) for c in d) for d in directions]
        try:
            grid = cls(
                curvature_values=[float(k) for k in family.get('curvature_values', [-1.0, 0.0, 1.0])],
                segment_count=int(family.get('segment_count', 3)),
                segment_length=float(family.get('segment_length', 0.5)),
                x0_values=[float(v) for v in family.get('x0_values', [0.5, 1.5])],
                z0_values=[float(v) for v in family.get('z0_values', [0.5])],
                theta0_values=[parse_real(v) for v in family.get('theta0_values', [0.0, 'pi/4', 'pi/2'])],
                pitches=[float(v) for v in data.get('pitches', [0.5, 1.0])],
                alphas=[float(v) for v in data.get('alphas', [-2.0, -1.0, 1.0])],
                directions=directions,
                step=float(family.get('step', 0.01)),
                sample_stride=int(family.get('sample_stride', 10)),
                t_samples=int(data.get('t_samples', 16)),
                batch_size=int(data.get('batch_size', Config.WORKERS)),
            )
        except (TypeError, ValueError) as e:
            raise SearchGridError(f"invalid search grid: {e}")
        grid.validate()
        return grid

    @classmethod
    def from_yaml(cls, path: Path = None) -> 'SearchGrid':
        """Load a grid from YAML (defaults to Config.SEARCH_GRID)."""
        path = Path(path or Config.SEARCH_GRID)
        if not path.exists():
            raise SearchGridError(f"Search grid file not found: {path}")
        with open(path, 'r', encoding='utf-8') as file:
            data = yaml.safe_load(file) or {}
        grid = cls.from_dict(data)
        logger.info(f"Loaded search grid from {path}: {len(grid.cells())} cells")
        return grid

    def to_dict(self) -> Dict[str, Any]:
        return {
            'profile_family': {
                'curvature_values': list(self.curvature_values),
                'segment_count': self.segment_count,
                'segment_length': self.segment_length,
                'x0_values': list(self.x0_values),
                'z0_values': list(self.z0_values),
                'theta0_values': list(self.theta0_values),
                'step': self.step,
                'sample_stride': self.sample_stride,
            },
            'pitches': list(self.pitches),
            'alphas': list(self.alphas),
            'directions': [list(d) for d in self.directions],
            't_samples': self.t_samples,
            'batch_size': self.batch_size,
        }

    def profile_parameters(self) -> List[Tuple[Tuple[float, ...], float, float, float]]:
        """(kappas, x0, z0, theta0) in lexicographic order."""
        return list(itertools.product(
            itertools.product(self.curvature_values, repeat=self.segment_count),
            self.x0_values, self.z0_values, self.theta0_values,
        ))

    def build_profiles(self) -> List[IntegratedProfile]:
        profiles = []
        for kappas, x0, z0, theta0 in self.profile_parameters():
            profiles.append(piecewise_profile(kappas, self.segment_length, x0, z0, theta0, step=self.step))
        logger.info(f"Integrated {len(profiles)} search profiles")
        return profiles

    def family(self) -> List[FamilyMember]:
        members = []
        for (kappas, x0, z0, theta0), profile in zip(self.profile_parameters(), self.build_profiles()):
            states = profile.nodes[::self.sample_stride]
            members.append(FamilyMember(
                label=profile.label(),
                states=states,
                is_cylinder=all(k == 0 for k in kappas) and abs(math.cos(theta0)) < 1e-12,
            ))
        return members

    def cells(self) -> List[Tuple[float, float, Tuple[float, float, float]]]:
        """(h, alpha, v) in lexicographic order."""
        return list(itertools.product(self.pitches, self.alphas, self.directions))


def parse_real(value: Any) -> float:
    """Parse a real number, also accepting "pi", "kpi" and "kpi/n" with an optional sign."""
    if isinstance(value, str):
        text = value.strip().replace(' ', '')
        sign = -1.0 if text.startswith('-') else 1.0
        text = text.lstrip('+-')
        if 'pi' in text:
            factor, _, rest = text.partition('pi')
            scale = float(factor) if factor else 1.0
            if rest == '':
                return sign * scale * math.pi
            if rest.startswith('/'):
                return sign * scale * math.pi / float(rest[1:])
        return sign * float(text)
    return float(value)


@dataclass
class SearchRecord:
    """Score of one (h, alpha, v) cell"""
    index: int
    h: float
    alpha: float
    direction: Tuple[float, float, float]
    profile_label: Optional[str]
    score: float
    witness: Optional[Witness]
    certified: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            'config': {'h': self.h, 'alpha': self.alpha, 'v': list(self.direction),
                       'profile': self.profile_label, 'index': self.index},
            'score': self.score,
            'witness': self.witness.to_dict() if self.witness else None,
            'certified': self.certified,
        }


@dataclass
class SearchResult:
    """Ranked search records and the consistency verdict"""
    records: List[SearchRecord]
    ranked: List[SearchRecord]
    tol_zero: float
    skipped: List[str] = field(default_factory=list)
    violations: List[str] = field(default_factory=list)

    @property
    def consistent(self) -> bool:
        return not self.violations

    @property
    def min_uncertified_score(self) -> Optional[float]:
        scores = [r.score for r in self.records if not r.certified]
        return min(scores) if scores else None

    def check(self) -> None:
        """
        Raises:
            TheoremInconsistencyError: If any violation was recorded
        """
        if self.violations:
            raise TheoremInconsistencyError(
                f"{len(self.violations)} search cells contradict the classification", self.violations
            )

    def to_dict(self) -> Dict[str, Any]:
        return {
            'tol_zero': self.tol_zero,
            'consistent': self.consistent,
            'min_uncertified_score': self.min_uncertified_score,
            'violations': list(self.violations),
            'skipped': list(self.skipped),
            'ranked': [r.to_dict() for r in self.ranked],
        }


class GridScorer:
    """Scores search cells against a sampled profile family"""

    def __init__(self, grid: SearchGrid, tol_zero: Optional[float] = None):
        grid.validate()
        self.grid = grid
        self.tol_zero = Config.TOL_ZERO if tol_zero is None else tol_zero
        self.logger = logging.getLogger(__name__)
        self.members = grid.family()
        self.has_cylinder = any(m.is_cylinder for m in self.members)
        self.t_values = np.linspace(0.0, TWO_PI, grid.t_samples, endpoint=False)
        self.skipped: List[str] = []
        self._stacked = self._stack(self.members)
        self._admissible = {h: self._admissible_mask(h) for h in grid.pitches}

    @staticmethod
    def _stack(members: List[FamilyMember]) -> ProfileState:
        return ProfileState(*(np.stack([np.asarray(getattr(m.states, name)) for m in members])
                              for name in ('s', 'x', 'z', 'theta', 'theta_prime', 'x_prime', 'z_prime')))

    def _admissible_mask(self, h: float) -> np.ndarray:
        reg = regularity_of_state(self._stacked, h)
        mask = np.all(reg > Config.EPS_REG, axis=1)
        for member, ok in zip(self.members, mask):
            if not ok:
                reason = f"{member.label} skipped at h={h}: regularity lost"
                self.logger.warning(reason)
                self.skipped.append(reason)
        return mask

    def score_cell(self, index: int, cell: Tuple[float, float, Tuple[float, float, float]]) -> SearchRecord:
        """Min over profiles of the sampled max |F(s, t)| for one (h, alpha, v)."""
        h, alpha, direction = cell
        params = SMSParams(alpha=alpha, direction=direction)
        certified = self.has_cylinder and alpha == -1.0 and abs(params.direction[2]) < self.tol_zero
        mask = self._admissible[h]
        if not np.any(mask):
            return SearchRecord(index, h, alpha, params.direction, None, math.inf, None, certified)

        quad = coefficients_general(self._stacked, h, params)
        F = _evaluate_on_samples(quad, self._stacked.s.shape, self.t_values)
        worst = np.max(np.abs(F), axis=(1, 2))
        worst = np.where(mask, worst, np.inf)
        best = int(np.argmin(worst))

        i, j = np.unravel_index(int(np.argmax(np.abs(F[best]))), F[best].shape)
        witness = Witness(
            s=float(self._stacked.s[best, i]),
            t=float(self.t_values[j]),
            F=float(F[best, i, j]),
        )
        return SearchRecord(index, h, alpha, params.direction, self.members[best].label,
                            float(worst[best]), witness, certified)

    async def score_all(self) -> List[SearchRecord]:
        """Score every cell in batches; results keep lexicographic cell order."""
        cells = self.grid.cells()
        records: List[SearchRecord] = []
        batch_size = self.grid.batch_size
        for start in range(0, len(cells), batch_size):
            batch = cells[start:start + batch_size]
            self.logger.debug(f"Scoring cells {start + 1}-{start + len(batch)} of {len(cells)}")
            tasks = [asyncio.to_thread(self.score_cell, start + k, cell) for k, cell in enumerate(batch)]
            records.extend(await asyncio.gather(*tasks))
        return records

    def summarize(self, records: List[SearchRecord]) -> SearchResult:
        if all(math.isinf(r.score) for r in records):
            raise SearchGridError("every grid cell was skipped")
        ranked = sorted(records, key=lambda r: r.score)
        violations = []
        for record in records:
            tag = f"h={record.h}, alpha={record.alpha}, v={record.direction}"
            if record.certified and not record.score < self.tol_zero:
                violations.append(f"certified cell {tag} scored {record.score!r} >= tol_zero")
            if not record.certified and record.score < 10 * self.tol_zero:
                violations.append(f"uncertified cell {tag} scored {record.score!r} < 10 tol_zero")
        result = SearchResult(records=records, ranked=ranked, tol_zero=self.tol_zero,
                              skipped=list(self.skipped), violations=violations)
        self.logger.info(
            f"Search finished: {len(records)} cells, min uncertified score "
            f"{result.min_uncertified_score!r}, {len(violations)} violations"
        )
        return result


async def falsification_search_async(grid: SearchGrid, tol_zero: Optional[float] = None) -> SearchResult:
    scorer = GridScorer(grid, tol_zero)
    records = await scorer.score_all()
    return scorer.summarize(records)


def falsification_search(grid: SearchGrid, tol_zero: Optional[float] = None) -> SearchResult:
    """
    Score every (h, alpha, v) cell of the grid

    Starts its own event loop with asyncio.run, so it cannot be called from
    a running loop; await falsification_search_async there instead.

    Args:
        grid: Search grid (validated)
        tol_zero: Vanishing threshold (defaults to Config.TOL_ZERO)

    Returns:
        SearchResult ranked by score (stable, so ties keep grid order)

    Raises:
        SearchGridError: For an empty or fully skipped grid
    """
    return asyncio.run(falsification_search_async(grid, tol_zero))
