"""Blow-up criteria and growth estimates for quasilinear elliptic inequalities."""

__version__ = "0.1.0"
