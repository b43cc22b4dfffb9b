"""Time integration of the layered QG system."""
