"""Nearest negative-imaginary systems toolkit.

C++ core exposed through pybind11: state-space modeling, NI/SNI analysis,
the port-Hamiltonian nearest-NI solver, and LQG synthesis.
"""

try:
    from ._niforge import *  # noqa: F401,F403
    from ._niforge import __doc__ as _core_doc  # noqa: F401
except ImportError:  # staged build tree keeps the extension next to this file
    from _niforge import *  # type: ignore # noqa: F401,F403

__version__ = "0.1.0"
