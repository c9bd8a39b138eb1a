"""Coupling-based (epsilon, delta) simulation relations for stochastic LTI systems."""

try:
    from ccsim._ccsim import *  # noqa: F401,F403
    from ccsim._ccsim import __doc__  # noqa: F401
except ImportError:  # in-tree build: the extension sits next to the package, not inside it
    from _ccsim import *  # noqa: F401,F403
    from _ccsim import __doc__  # noqa: F401

__version__ = "0.1.0"
