"""
helisms - Helicoidal Singular Minimal Surfaces

Closed-form geometry, residual analysis, a finite-difference oracle,
generators and classification checks for helicoidal surfaces satisfying
H = alpha <N, v> / <p, v>.
"""

__version__ = "1.0.0"
__author__ = "helisms contributors"
