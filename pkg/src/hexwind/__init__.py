"""hexwind: percolation interfaces and winding statistics on the
triangular lattice, with a two-sided radial SLE integrator."""

from ._kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
