"""QGHS snapshot storage."""
