"""Invariant and identity checks behind the verify subcommand."""
