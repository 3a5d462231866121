"""specshift: spectral flow, spectral shift functions and Fredholm indices
of finite-dimensional self-adjoint operator paths, each computed by several
independent numerical routes that are required to agree.
"""

__version__ = "0.1.0"

from .kernels import BACKEND

__all__ = ["BACKEND", "__version__"]
