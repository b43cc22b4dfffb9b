"""Calderón commutator, Littlewood-Paley projections, mollifier identities."""
