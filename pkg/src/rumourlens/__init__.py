"""Rumour veracity analysis from stance-annotated tweet cascades."""

__version__ = "0.1.0"
