"""Bar-level music structure segmentation.

Thin wrapper over the C++ library. Feature arrays may be passed as
``BarwiseTF`` objects or as 2D numpy arrays with one bar per row.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401

__version__ = "0.1.0"
