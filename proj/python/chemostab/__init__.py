"""Python bindings for the chemostab simulation and stability library."""

from ._chemostab import *  # noqa: F401,F403
from ._chemostab import __version__  # noqa: F401
