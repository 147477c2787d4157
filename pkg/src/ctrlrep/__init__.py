"""Exact classification tools for finitely presented modules over controlled
matrix algebras and for finite-dimensional n-subspace representations."""

from . import linal, quiver, controlled, isomonoid  # noqa: F401

__all__ = ["linal", "quiver", "controlled", "isomonoid"]
__version__ = "0.1.0"
