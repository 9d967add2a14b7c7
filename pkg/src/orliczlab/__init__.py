"""Numerical laboratory for Orlicz-space hypercontractivity of diffusion semigroups."""

__version__ = "0.1.0"
