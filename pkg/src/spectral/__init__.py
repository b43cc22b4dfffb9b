"""Periodic grids, spectral transforms, mollifiers and data preparation."""
