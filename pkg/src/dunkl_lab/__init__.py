"""Exact Dunkl-operator algebra, identity checks and separated-variable spectra."""

from .field import CoeffField
from .models import CATALOG, ModelSpec, build_generator, build_hamiltonian
from .operators import Operator, commutator, compose

__version__ = "0.1.0"

__all__ = [
    "CATALOG",
    "CoeffField",
    "ModelSpec",
    "Operator",
    "build_generator",
    "build_hamiltonian",
    "commutator",
    "compose",
]
