"""Solver processes and file formats."""
