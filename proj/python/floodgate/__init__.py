"""Surrogate-based global sensitivity analysis with valid confidence intervals."""

from ._core import *  # noqa: F401,F403
from ._core import __version__, io  # noqa: F401
