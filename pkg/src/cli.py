#!/usr/bin/env python3
"""
helisms command line

Subcommands:
    curvature  closed-form vs finite-difference mean curvature table
    coeffs     A0..A3 coefficient table plus the two combinations
    verify     cylinder certification, vertical-direction sweep and falsification search
    catenary   rotational profile shooting with optional OBJ mesh
    mesh       OBJ mesh of a helicoidal surface

Exit codes: 0 success, 1 classification inconsistency, 2 geometric
precondition failure, 3 usage or configuration error.
"""

import argparse
import itertools
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, TextIO, Tuple

import numpy as np

from .config import Config, ConfigurationError
from .classifier import (
    ClassifierError,
    SearchGrid,
    TheoremInconsistencyError,
    Verdict,
    certify_cylinder,
    check_prop1,
    falsification_search,
    parse_real,
)
from .generators import (
    MeshError,
    MeshSpec,
    RotationalODEState,
    build_mesh,
    export_obj,
    format_profile_csv,
    integrate_rotational_profile,
    max_profile_residual,
)
from .geometry import GeometryError, HelicoidalSurface, mean_curvature_theta, normalize
from .numeric_oracle import FDConfig, FDConfigError, OracleError, fd_mean_curvature
from .profiles import (
    ArcProfile,
    CylinderProfile,
    LineProfile,
    Profile,
    ProfileDomainError,
    ProfileError,
    piecewise_profile,
)
from .residuals import (
    HalfspaceError,
    InvalidParamsError,
    ResidualError,
    SMSParams,
    coefficients_general,
    combo_hA0_zA1,
    combo_v2A3_v1A2,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INCONSISTENT = 1
EXIT_GEOMETRY = 2
EXIT_USAGE = 3

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

TOLERANCE_FLAGS = ('eps_reg', 'eps_half', 'tol_zero', 'fd_step')

RUN_CONFIG_KEYS = (
    'profile', 'pitch', 'alpha', 'direction', 's', 's_range', 't', 't_range', 'output',
    'grid', 'x0', 'z0', 'theta0', 'step', 'n_steps', 'mesh', 'strict', 'log_level', 'tolerances',
)

PROP1_PITCHES = (0.25, 1.0, 4.0)


class UsageError(Exception):
    """Exception raised for malformed command lines, descriptors and run configs."""
    pass


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting with status 2."""

    def error(self, message: str):
        raise UsageError(message)


Range = Tuple[float, float, int]


@dataclass
class RunConfig:
    """Effective parameters of one CLI run; echoed in every report header."""
    subcommand: str
    profile: Optional[str] = None
    pitch: float = 0.0
    alpha: Optional[float] = None
    direction: Tuple[float, float, float] = (0.0, 0.0, 1.0)
    s_range: Optional[Range] = None
    t_range: Optional[Range] = None
    output: Optional[str] = None
    grid: Optional[str] = None
    x0: float = 1.0
    z0: float = 1.0
    theta0: float = math.pi / 2
    step: Optional[float] = None
    n_steps: int = 2000
    mesh: Optional[str] = None
    strict: bool = False
    log_level: str = field(default_factory=lambda: Config.LOG_LEVEL)
    tolerances: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['direction'] = list(self.direction)
        data['s_range'] = list(self.s_range) if self.s_range else None
        data['t_range'] = list(self.t_range) if self.t_range else None
        data['tolerances'] = Config.as_dict()
        if data['step'] is None and self.subcommand == 'catenary':
            data['step'] = Config.RK4_STEP
        return data

    def header(self) -> str:
        return '# config: ' + json.dumps(self.to_dict(), sort_keys=True)


def _parse_params(body: str) -> Dict[str, str]:
    params: Dict[str, str] = {}
    if not body:
        return params
    for item in body.split(','):
        if '=' not in item:
            raise UsageError(f"descriptor parameter '{item}' is not key=value")
        key, value = item.split('=', 1)
        params[key.strip()] = value.strip()
    return params


def _real(params: Dict[str, str], key: str, default: Optional[float] = None) -> float:
    if key not in params:
        if default is None:
            raise UsageError(f"descriptor is missing '{key}'")
        return default
    try:
        return parse_real(params.pop(key))
    except ValueError:
        raise UsageError(f"descriptor value for '{key}' is not a real number")


def _sign(text: str) -> int:
    mapping = {'+': 1, '+1': 1, '1': 1, '-': -1, '-1': -1}
    if text not in mapping:
        raise UsageError(f"cylinder sign must be + or -, got '{text}'")
    return mapping[text]


def parse_profile(descriptor: str) -> Profile:
    """
    Build a profile from ``kind:key=val,...``

    Kinds: cylinder (x0, z0, sign), line (theta0, x0, z0), helicoid (x0, z0),
    arc (kappa, theta0, x0, z0), piecewise (kappas=k1;k2;..., length, x0, z0,
    theta0, step). Closed forms accept smin/smax for their domain.

    Raises:
        UsageError: For unknown kinds, missing or unparseable parameters
    """
    kind, _, body = descriptor.partition(':')
    kind = kind.strip().lower()
    params = _parse_params(body)

    domain = None
    if kind != 'piecewise':
        domain = (_real(params, 'smin', -10.0), _real(params, 'smax', 10.0))

    if kind == 'cylinder':
        sign = _sign(params.pop('sign', '+'))
        profile = CylinderProfile(_real(params, 'x0'), _real(params, 'z0', 0.0), sign, domain)
    elif kind == 'line':
        profile = LineProfile(_real(params, 'theta0'), _real(params, 'x0'), _real(params, 'z0', 0.0), domain)
    elif kind == 'helicoid':
        profile = LineProfile(0.0, _real(params, 'x0', 1.0), _real(params, 'z0', 0.0), domain)
    elif kind == 'arc':
        profile = ArcProfile(_real(params, 'kappa'), _real(params, 'theta0', 0.0),
                             _real(params, 'x0'), _real(params, 'z0', 0.0), domain)
    elif kind == 'piecewise':
        if 'kappas' not in params:
            raise UsageError("piecewise descriptor is missing 'kappas'")
        try:
            kappas = [parse_real(k) for k in params.pop('kappas').split(';') if k]
        except ValueError:
            raise UsageError("piecewise kappas must be real numbers separated by ';'")
        profile = piecewise_profile(
            kappas, _real(params, 'length'), _real(params, 'x0'), _real(params, 'z0', 0.0),
            _real(params, 'theta0', 0.0), step=_real(params, 'step', Config.RK4_STEP),
        )
    else:
        raise UsageError(f"unknown profile kind '{kind}'")

    if params:
        raise UsageError(f"unknown {kind} parameters: {', '.join(sorted(params))}")
    return profile


def parse_range(text: str) -> Range:
    """'a:b:n' into (a, b, n)."""
    parts = str(text).split(':')
    if len(parts) != 3:
        raise UsageError(f"range must be start:end:count, got '{text}'")
    try:
        return parse_real(parts[0]), parse_real(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"range must be start:end:count, got '{text}'")


def parse_direction(value: Any) -> Tuple[float, float, float]:
    """'v1,v2,v3' (or a list) normalized to a unit vector."""
    try:
        components = value.split(',') if isinstance(value, str) else list(value)
        vector = [parse_real(c) for c in components]
        unit = normalize(vector)
    except (ValueError, TypeError, GeometryError) as e:
        raise UsageError(f"direction must be three components, not all zero: {e}")
    return tuple(float(c) for c in unit)


def _point_range(value: Any) -> Range:
    v = parse_real(value)
    return (v, v, 1)


def _values(rng: Range) -> np.ndarray:
    start, end, count = rng
    if count < 1:
        raise UsageError("range count must be at least 1")
    return np.linspace(start, end, count) if count > 1 else np.array([start])


def _load_json_config(path: str) -> Dict[str, Any]:
    try:
        with open(path, 'r', encoding='utf-8') as file:
            data = json.load(file)
    except OSError as e:
        raise UsageError(f"cannot read config file {path}: {e}")
    except json.JSONDecodeError as e:
        raise UsageError(f"config file {path} is not valid JSON: {e}")
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    unknown = set(data) - set(RUN_CONFIG_KEYS)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return data


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """
    Merge --config JSON with command-line flags (flags win)

    Raises:
        UsageError: For invalid or conflicting values
    """
    merged: Dict[str, Any] = _load_json_config(args.config) if args.config else {}
    tolerances = dict(merged.pop('tolerances', {}) or {})
    for key in RUN_CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None and value is not False:
            merged[key] = value
    for key in TOLERANCE_FLAGS:
        value = getattr(args, key, None)
        if value is not None:
            tolerances[key] = value

    config = RunConfig(subcommand=args.command)
    try:
        for key in ('profile', 'output', 'grid', 'mesh', 'log_level'):
            if merged.get(key) is not None:
                setattr(config, key, str(merged[key]))
        for key in ('pitch', 'alpha', 'x0', 'z0', 'theta0', 'step'):
            if merged.get(key) is not None:
                setattr(config, key, parse_real(merged[key]))
        if merged.get('n_steps') is not None:
            config.n_steps = int(merged['n_steps'])
        config.strict = bool(merged.get('strict', False))
    except (TypeError, ValueError) as e:
        raise UsageError(f"invalid run configuration value: {e}")

    if merged.get('direction') is not None:
        config.direction = parse_direction(merged['direction'])

    for axis in ('s', 't'):
        single, ranged = merged.get(axis), merged.get(f"{axis}_range")
        if single is not None and ranged is not None:
            raise UsageError(f"--{axis} and --{axis}-range are mutually exclusive")
        try:
            if single is not None:
                setattr(config, f"{axis}_range", _point_range(single))
            elif ranged is not None:
                value = parse_range(ranged) if isinstance(ranged, str) else tuple(ranged)
                setattr(config, f"{axis}_range", (parse_real(value[0]), parse_real(value[1]), int(value[2])))
        except (TypeError, ValueError, IndexError):
            raise UsageError(f"invalid {axis} sampling: {single if single is not None else ranged}")

    config.tolerances = {k: float(v) for k, v in tolerances.items()}
    return config


def _write_text(text: str, output: Optional[str], stdout: TextIO) -> None:
    if output:
        with open(output, 'w', encoding='utf-8', newline='\n') as file:
            file.write(text)
        logger.info(f"Wrote {output}")
    else:
        stdout.write(text)


def _format(value: float) -> str:
    return format(float(value), '.17g')


def _csv(config: RunConfig, columns: Sequence[str], rows: List[Sequence[float]]) -> str:
    lines = [config.header(), ','.join(columns)]
    lines.extend(','.join(_format(v) for v in row) for row in rows)
    return '\n'.join(lines) + '\n'


def _require(config: RunConfig, *names: str) -> None:
    for name in names:
        if getattr(config, name) is None:
            raise UsageError(f"{config.subcommand} requires --{name.replace('_', '-')}")


def cmd_curvature(config: RunConfig, stdout: TextIO) -> int:
    """CSV rows s,t,H_closed,H_fd,abs_diff."""
    _require(config, 'profile')
    surface = HelicoidalSurface(parse_profile(config.profile), config.pitch)
    s_values = _values(config.s_range or (0.0, 0.0, 1))
    t_values = _values(config.t_range or (0.0, 0.0, 1))
    cfg = FDConfig()
    rows = []
    for s in s_values:
        state = surface.require_regular(float(s))
        closed = float(mean_curvature_theta(state, surface.pitch))
        for t in t_values:
            numeric = fd_mean_curvature(surface, float(s), float(t), cfg)
            rows.append((s, t, closed, numeric, abs(closed - numeric)))
    _write_text(_csv(config, ('s', 't', 'H_closed', 'H_fd', 'abs_diff'), rows), config.output, stdout)
    return EXIT_OK


def cmd_coeffs(config: RunConfig, stdout: TextIO) -> int:
    """CSV rows s,A0,A1,A2,A3,hA0_zA1,v2A3_v1A2."""
    _require(config, 'profile', 'alpha')
    try:
        params = SMSParams(alpha=config.alpha, direction=config.direction)
    except InvalidParamsError as e:
        raise UsageError(str(e))
    surface = HelicoidalSurface(parse_profile(config.profile), config.pitch)
    s_values = _values(config.s_range or (0.0, 0.0, 1))
    states = surface.require_regular(s_values)
    quad = coefficients_general(states, config.pitch, params)
    first = combo_hA0_zA1(states, config.pitch, params)
    second = combo_v2A3_v1A2(states, config.pitch, params)
    columns = [np.broadcast_to(c, s_values.shape) for c in (quad.A0, quad.A1, quad.A2, quad.A3, first, second)]
    rows = [(s, *(float(c[i]) for c in columns)) for i, s in enumerate(s_values)]
    _write_text(_csv(config, ('s', 'A0', 'A1', 'A2', 'A3', 'hA0_zA1', 'v2A3_v1A2'), rows), config.output, stdout)
    return EXIT_OK


def _cylinder_checks() -> List[Dict[str, Any]]:
    cases = [
        (1.0, 2.0, -1.0, (1.0, 0.0, 0.0)),
        (1.0, 2.0, -1.0, (0.0, 0.0, 1.0)),
        (1.0, 2.0, -2.0, (1.0, 0.0, 0.0)),
        (1.5, 0.5, -1.0, (0.0, 1.0, 0.0)),
    ]
    checks = []
    for x0, h, alpha, v in cases:
        for sign in (1, -1):
            report = certify_cylinder(x0, 0.0, sign, h, alpha, v)
            expected = v[2] == 0.0 and alpha == -1.0
            actual = report.verdict is Verdict.SINGULAR_MINIMAL
            checks.append({'report': report.to_dict(), 'expected_singular_minimal': expected,
                           'consistent': expected == actual})
    return checks


def _prop1_sweep(grid: SearchGrid) -> Dict[str, Any]:
    profiles: List[Profile] = grid.build_profiles()
    profiles.append(CylinderProfile(x0=1.0, z0=0.5))
    counts = {verdict.value: 0 for verdict in Verdict}
    closest = None
    for h in PROP1_PITCHES:
        for profile, alpha in itertools.product(profiles, grid.alphas):
            report = check_prop1(profile, h, alpha)
            counts[report.verdict.value] += 1
            size = max(report.coefficient_magnitudes.values())
            if closest is None or size < closest[0]:
                closest = (size, report)
    return {
        'pitches': list(PROP1_PITCHES),
        'alphas': list(grid.alphas),
        'profiles': len(profiles),
        'verdicts': counts,
        'closest': closest[1].to_dict() if closest else None,
        'consistent': counts[Verdict.SINGULAR_MINIMAL.value] == 0,
    }


def cmd_verify(config: RunConfig, stdout: TextIO) -> int:
    """JSON report; exit 1 when any check contradicts the classification."""
    grid = SearchGrid.from_yaml(Path(config.grid) if config.grid else None)
    cylinder = _cylinder_checks()
    prop1 = _prop1_sweep(grid)
    search = falsification_search(grid)
    consistent = all(c['consistent'] for c in cylinder) and prop1['consistent'] and search.consistent
    report = {
        'config': config.to_dict(),
        'grid': grid.to_dict(),
        'cylinder': cylinder,
        'prop1': prop1,
        'search': search.to_dict(),
        'consistent': consistent,
    }
    _write_text(json.dumps(report, indent=2) + '\n', config.output, stdout)
    if not consistent:
        for violation in search.violations:
            logger.error(violation)
        search.check()
        logger.error("cylinder or vertical-direction checks contradict the classification")
        return EXIT_INCONSISTENT
    return EXIT_OK


def cmd_catenary(config: RunConfig, stdout: TextIO, stderr: TextIO) -> int:
    """Profile CSV, optional h = 0 OBJ mesh and the maximal residual."""
    _require(config, 'alpha')
    if not (config.x0 > 0 and config.z0 > 0):
        raise UsageError("catenary requires --x0 > 0 and --z0 > 0")
    initial = RotationalODEState(x=config.x0, z=config.z0, theta=config.theta0)
    profile = integrate_rotational_profile(config.alpha, initial, config.step, config.n_steps)
    csv_text = config.header() + '\n' + format_profile_csv(profile.nodes)
    _write_text(csv_text, config.output, stdout)
    summary = stdout if config.output else stderr

    if len(profile.result.s) > 2:
        summary.write(f"max_residual={_format(max_profile_residual(profile, config.alpha))}\n")
    if profile.truncated:
        summary.write(f"truncated: {profile.result.truncation_reason}\n")

    if config.mesh:
        surface = HelicoidalSurface(profile, pitch=0.0)
        s_range = config.s_range or (profile.domain[0], profile.domain[1], 65)
        t_range = config.t_range or (0.0, 2 * math.pi, 33)
        mesh = build_mesh(surface, MeshSpec(s_range, t_range))
        export_obj(mesh, config.mesh)
        summary.write(f"vertices={mesh.vertex_count} triangles={mesh.triangle_count}\n")

    if profile.truncated and config.strict:
        logger.error(f"Trajectory truncated before {config.n_steps} steps")
        return EXIT_GEOMETRY
    return EXIT_OK


def cmd_mesh(config: RunConfig, stdout: TextIO) -> int:
    """OBJ mesh and its vertex/triangle counts."""
    _require(config, 'profile', 's_range', 't_range', 'output')
    surface = HelicoidalSurface(parse_profile(config.profile), config.pitch)
    mesh = build_mesh(surface, MeshSpec(config.s_range, config.t_range))
    export_obj(mesh, config.output)
    stdout.write(f"vertices={mesh.vertex_count} triangles={mesh.triangle_count}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument('--config', help='JSON run configuration (flags override it)')
    common.add_argument('--log-level', dest='log_level', type=str.upper,
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'])
    common.add_argument('--output', help='Output file (stdout when omitted)')
    for name in TOLERANCE_FLAGS:
        common.add_argument(f"--{name.replace('_', '-')}", dest=name, type=float)

    surface = _Parser(add_help=False)
    surface.add_argument('--profile', help='Profile descriptor kind:key=val,...')
    surface.add_argument('--pitch', type=str, help='Pitch h')

    sampling = _Parser(add_help=False)
    sampling.add_argument('--s', dest='s', help='Single arc-length sample')
    sampling.add_argument('--s-range', dest='s_range', help='start:end:count')
    sampling.add_argument('--t', dest='t', help='Single motion parameter')
    sampling.add_argument('--t-range', dest='t_range', help='start:end:count')

    equation = _Parser(add_help=False)
    equation.add_argument('--alpha', type=str, help='Exponent alpha (nonzero)')
    equation.add_argument('--direction', help='Unit direction v1,v2,v3')

    parser = _Parser(prog='helisms', description='Helicoidal singular minimal surface toolkit')
    commands = parser.add_subparsers(dest='command', parser_class=_Parser)
    commands.required = True
    commands.add_parser('curvature', parents=[common, surface, sampling],
                        help='Closed-form vs finite-difference mean curvature')
    commands.add_parser('coeffs', parents=[common, surface, sampling, equation],
                        help='Coefficient table A0..A3')
    verify = commands.add_parser('verify', parents=[common], help='Certify the classification')
    verify.add_argument('--grid', help='Search grid YAML')
    catenary = commands.add_parser('catenary', parents=[common, sampling, equation],
                                   help='Shoot a rotational profile')
    for name in ('x0', 'z0', 'theta0', 'step'):
        catenary.add_argument(f"--{name}", type=str)
    catenary.add_argument('--n-steps', dest='n_steps', type=int)
    catenary.add_argument('--mesh', help='Also write the h = 0 surface as OBJ')
    catenary.add_argument('--strict', action='store_true', help='Exit 2 when the trajectory is truncated')
    commands.add_parser('mesh', parents=[common, surface, sampling], help='Write an OBJ mesh')
    return parser


def _configure_logging(level: str) -> None:
    logging.basicConfig(level=getattr(logging, level.upper(), logging.WARNING), format=LOG_FORMAT,
                        datefmt='%Y-%m-%d %H:%M:%S', stream=sys.stderr)
    logging.getLogger().setLevel(getattr(logging, level.upper(), logging.WARNING))


def main(argv: Optional[Sequence[str]] = None, stdout: TextIO = None, stderr: TextIO = None) -> int:
    """Run one subcommand and return its exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    saved = Config.snapshot()
    try:
        args = build_parser().parse_args(argv)
        config = build_run_config(args)
        _configure_logging(config.log_level)
        Config.apply_overrides(config.tolerances)

        if config.subcommand == 'curvature':
            return cmd_curvature(config, stdout)
        if config.subcommand == 'coeffs':
            return cmd_coeffs(config, stdout)
        if config.subcommand == 'verify':
            return cmd_verify(config, stdout)
        if config.subcommand == 'catenary':
            return cmd_catenary(config, stdout, stderr)
        return cmd_mesh(config, stdout)

    except FDConfigError as e:
        stderr.write(f"error: {e}\n")
        return EXIT_USAGE
    except TheoremInconsistencyError as e:
        logger.error(str(e))
        stderr.write(f"inconsistent: {e}\n")
        return EXIT_INCONSISTENT
    except (GeometryError, HalfspaceError, ProfileDomainError, OracleError) as e:
        logger.error(str(e))
        stderr.write(f"geometric precondition failed: {e}\n")
        return EXIT_GEOMETRY
    except (UsageError, ConfigurationError, ClassifierError, ProfileError, ResidualError,
            MeshError, OSError) as e:
        stderr.write(f"error: {e}\n")
        return EXIT_USAGE
    finally:
        Config.restore(saved)


if __name__ == '__main__':
    raise SystemExit(main())
