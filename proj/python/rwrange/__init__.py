"""Monte Carlo lab for simple random walk range observables."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
