"""A small proof checker for dependent type theory with typal heterogeneous equality."""

from .core import Decl, Signature
from .diagnostics import Diagnostic, HTTError, Span, render_diagnostic
from .level import LevelNF, level_eq, level_normalize
from .nbe import convert, evaluate, normalize, quote
from .surface import parse_file, parse_text, pretty_module
from .typecheck import CheckOptions, base_signature, check_module, check_source

__version__ = "0.1.0"
