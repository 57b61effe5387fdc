"""Workbench for intermediate justification logics."""

__version__ = "0.1.0"
