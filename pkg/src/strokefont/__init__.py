"""Stroke-based handwritten Gujarati font synthesis toolkit."""

__version__ = "0.1.0"
