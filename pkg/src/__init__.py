"""Half-space quasi-geostrophic solver and verification suite."""
