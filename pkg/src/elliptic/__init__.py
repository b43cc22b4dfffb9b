"""Slab discretization of the half-space and its elliptic solvers."""
