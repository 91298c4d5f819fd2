"""Classification, diagonalization and interference of two-mode Gaussian transducers."""

from .classification import Classification, classify
from .diagonalization import diagonalize, diagonalize_constrained
from .errors import TransducerError

__all__ = ["Classification", "TransducerError", "classify", "diagonalize", "diagonalize_constrained"]
__version__ = "0.1.0"
