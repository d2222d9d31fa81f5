"""Sup-normalized spectral sampling for Brown-Resnick max-stable processes.

Thin re-export of the compiled extension. In an installed package the
extension lives inside this package; in a plain CMake build tree it sits on
sys.path as a top-level module.
"""

try:
    from ._core import *  # noqa: F401,F403
    from ._core import __doc__ as _core_doc
except ImportError:
    from _core import *  # noqa: F401,F403
    from _core import __doc__ as _core_doc

__version__ = "0.1.0"
