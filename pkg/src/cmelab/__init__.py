"""Fourier-lattice and coupled-mode tools for the cubic elliptic problem
``U'' + omega^2 U + eps W(x) U = sigma |U|^2 U`` with a periodic potential."""

from .errors import (
    BranchNotPresent,
    CmelabError,
    DomainTooSmall,
    InvalidRegime,
    NoConvergence,
    RegimeInvalid,
    SingularJacobian,
)

__version__ = "0.1.0"

__all__ = [
    "BranchNotPresent",
    "CmelabError",
    "DomainTooSmall",
    "InvalidRegime",
    "NoConvergence",
    "RegimeInvalid",
    "SingularJacobian",
    "__version__",
]
