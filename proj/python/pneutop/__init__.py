"""Topology optimization of pressure-driven compliant mechanisms."""

try:
    from ._pneutop import *  # noqa: F401,F403  (installed package layout)
    from ._pneutop import __doc__ as _doc
except ImportError:
    from _pneutop import *  # noqa: F401,F403  (in-tree build layout)
    from _pneutop import __doc__ as _doc

__doc__ = _doc
__version__ = "1.0.0"
