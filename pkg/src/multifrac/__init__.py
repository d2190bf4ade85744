"""Levy process simulation and 2-microlocal / multifractal analysis toolkit."""

from .util import __version__

__all__ = ["__version__"]
