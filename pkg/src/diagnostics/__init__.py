"""Energy, flux and weak-formulation diagnostics."""
