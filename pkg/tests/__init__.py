"""Test suite for the half-space QG solver."""
