"""Ion chain interference toolkit.

Simulates, fits, and analyzes the interference pattern of light scattered by
a linear chain of trapped ions. The heavy lifting lives in the compiled
extension; this package re-exports its operations.
"""

try:
    from ._core import *  # noqa: F401,F403
    from ._core import __version__  # noqa: F401
except ImportError:  # build-tree layout: extension sits on PYTHONPATH
    from _core import *  # noqa: F401,F403
    from _core import __version__  # noqa: F401
