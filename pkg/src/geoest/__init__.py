"""Geometric rigid-body state estimation on SO(3) and SE(3)."""
