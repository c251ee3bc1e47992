"""Planar piecewise-smooth vector fields split by the line y = 0.

The compiled core lives in ``pwfield._core``; everything is re-exported here.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401
