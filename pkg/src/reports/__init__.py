"""Spectrum, energy and equivalence reports."""
