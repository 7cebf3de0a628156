"""Datasheet compiler for machine-learning sensors."""

__version__ = "0.1.0"
