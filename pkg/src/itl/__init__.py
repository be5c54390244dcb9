"""Intuitionistic linear temporal logic: evaluation, search and model constructions."""

from .errors import BudgetExceeded, ITLError, ModelError, ParseError
from .formula import Fragment, parse, render
from .model import Model, eval, truth_set, validate

__all__ = [
    "BudgetExceeded", "Fragment", "ITLError", "Model", "ModelError", "ParseError",
    "eval", "parse", "render", "truth_set", "validate",
]
__version__ = "0.1.0"
