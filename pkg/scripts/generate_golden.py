#!/usr/bin/env python3
"""
Golden File Generator

Regenerates the frozen reference outputs under tests/golden/. Run only after
the outputs have been verified; the tests compare against these files.
"""

import argparse
import logging
import math
import sys
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.generators import MeshError, MeshSpec, build_mesh, export_obj
from src.geometry import GeometryError, HelicoidalSurface
from src.profiles import CylinderProfile

GOLDEN_DIR = Path(__file__).parent.parent / 'tests' / 'golden'

# Unit cylinder, s in [0, 1], t in [0, 2 pi], 3 x 3 nodes
UNIT_CYLINDER_SPEC = MeshSpec(s_range=(0.0, 1.0, 3), t_range=(0.0, 2 * math.pi, 3))


def generate_unit_cylinder(golden_dir: Path) -> Path:
    surface = HelicoidalSurface(CylinderProfile(x0=1.0, z0=0.0), pitch=0.0)
    mesh = build_mesh(surface, UNIT_CYLINDER_SPEC)
    return export_obj(mesh, golden_dir / 'unit_cylinder_3x3.obj')


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Regenerate helisms golden files")
    parser.add_argument('--golden-dir', default=str(GOLDEN_DIR),
                        help=f"output directory (default: {GOLDEN_DIR})")
    parser.add_argument('--force', action='store_true', help='Overwrite existing golden files')
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')

    golden_dir = Path(args.golden_dir)
    golden_dir.mkdir(parents=True, exist_ok=True)
    target = golden_dir / 'unit_cylinder_3x3.obj'
    if target.exists() and not args.force:
        print(f"ERROR: {target} exists; pass --force to overwrite")
        return 1
    try:
        path = generate_unit_cylinder(golden_dir)
    except (GeometryError, MeshError) as e:
        print(f"ERROR: {e}")
        return 1

    print(f"Wrote: {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
