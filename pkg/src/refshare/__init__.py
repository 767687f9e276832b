"""Static sharing analysis for a small functional-imperative language
with mutable references and destructive update."""

from .aliasset import AliasSet, VarComp, mk_pair
from .analysis import Diagnostic, FuncResult, Options, analyze_program
from .components import DomainMode, Universe
from .parser import ParseError, parse_program
from .typecheck import TypeErr, check_types

__version__ = "0.1.0"

__all__ = [
    "AliasSet",
    "VarComp",
    "mk_pair",
    "Diagnostic",
    "FuncResult",
    "Options",
    "analyze_program",
    "DomainMode",
    "Universe",
    "ParseError",
    "parse_program",
    "TypeErr",
    "check_types",
    "__version__",
]
