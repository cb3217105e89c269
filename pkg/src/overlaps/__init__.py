"""Eigenvector self-overlaps in the elliptic Ginibre ensembles."""
from .ensembles import ComplexPoint, EnsembleSpec, Kind
from .specfun import DomainError

__version__ = "0.1.0"

__all__ = ["ComplexPoint", "DomainError", "EnsembleSpec", "Kind", "__version__"]
