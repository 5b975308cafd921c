"""FK-Ising lattice engine with a ghost magnetic field.

Thin wrapper around the C++ core; see the project README for the full
command-line interface and file formats.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__ as _core_doc  # noqa: F401

__version__ = "0.1.0"
