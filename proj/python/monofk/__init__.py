"""Charged particle in a magnetic monopole field.

Spectral semigroup, bundle geometry, and stochastic parallel transport,
backed by the compiled extension module.
"""

from ._monofk import *  # noqa: F401,F403
from ._monofk import __version__  # noqa: F401
