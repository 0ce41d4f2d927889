"""Stencil kernel backend selection.

Imports the compiled Cython kernels when available and falls back to the
numpy implementation otherwise. ``BACKEND`` records which one is active;
both expose identical ``gather4``/``gather6`` signatures and results.
"""

try:
    from ._stencils import gather4, gather6

    BACKEND = "compiled"
except ImportError:  # extension not built
    from .fallback import gather4, gather6

    BACKEND = "fallback"

from . import fallback

__all__ = ["gather4", "gather6", "BACKEND", "fallback"]
