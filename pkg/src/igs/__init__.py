"""Iterated graph systems: generation, spectral and Lyapunov dimension theory,
and box-counting estimates."""

__version__ = "0.1.0"

from .errors import IGSError  # noqa: E402
from .graph import ColoredDigraph, RuleGraph  # noqa: E402
from .system import SystemSpec, generate, load_bundled, parse_system_file  # noqa: E402

__all__ = [
    "ColoredDigraph",
    "IGSError",
    "RuleGraph",
    "SystemSpec",
    "generate",
    "load_bundled",
    "parse_system_file",
]
