"""Riesz transforms, fractional Laplacians, Poisson extension."""
