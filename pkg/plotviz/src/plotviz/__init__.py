"""Rendering layer for pbvf CSV artifacts.

This package only reads files the experiment harness wrote; it never imports
the training code. Everything it needs to know about an artifact is in the
file itself plus its name.
"""

__all__ = ["__version__"]
__version__ = "0.1.0"
