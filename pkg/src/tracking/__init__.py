"""Diagnostics series export."""
