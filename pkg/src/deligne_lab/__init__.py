"""Exact computations of ordinary, differential and twisted periodic cohomology
on finite simplicial complexes, with rational models for the de Rham side.

Rationals stand in for the reals and Q/Z for the circle group, so every
answer is an exact group descriptor.
"""

from . import ahss, cdga, checks, deligne, groups, linalg, simplicial, twisted
from .ahss import *  # noqa: F401,F403
from .cdga import *  # noqa: F401,F403
from .deligne import *  # noqa: F401,F403
from .groups import *  # noqa: F401,F403
from .simplicial import *  # noqa: F401,F403
from .twisted import *  # noqa: F401,F403

__version__ = "0.1.0"

__all__ = [*groups.__all__, *simplicial.__all__, *deligne.__all__, *twisted.__all__, *ahss.__all__, *cdga.__all__]
