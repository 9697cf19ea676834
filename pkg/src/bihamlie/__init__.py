"""Compatible Poisson structures and bi-Hamiltonian systems on low-dimensional Lie groups."""

from .expr import Expression, RationalExpression, parse

__version__ = "0.1.0"

__all__ = ["Expression", "RationalExpression", "parse", "__version__"]
