"""Ergodic averages of torus translation flows against weight measures."""

from ergolab._core import *  # noqa: F401,F403
from ergolab._core import __version__  # noqa: F401
