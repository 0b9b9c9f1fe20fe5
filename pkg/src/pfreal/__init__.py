"""Counting real solutions of small power-flow systems by homotopy continuation."""

__version__ = "0.1.0"
