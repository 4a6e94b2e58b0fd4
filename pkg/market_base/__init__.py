"""Pairwise-stable outcomes for two-sided buyer-seller markets with integer prices."""
