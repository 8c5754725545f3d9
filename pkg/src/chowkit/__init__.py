"""Exact computation of Chow forms from straight-line programs.

The package computes the Chow forms of the equidimensional components
of a projective variety cut out by polynomials given as straight-line
programs, entirely over the rationals, together with the classical
consequences: dense and sparse resultants and the geometric resolution
of zero-dimensional fibers of generic over-determined systems.
"""

from __future__ import annotations

__version__ = "0.1.0"
