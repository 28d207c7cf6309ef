"""High-order constraint-preserving compact OEDG solver for the spherically
symmetric Einstein-Euler equations."""

__version__ = "0.1.0"
