"""Subgraph-based bundle recommendation: Python bindings to the C++ core."""

from ._suger import *  # noqa: F401,F403
from ._suger import Error, ParseError  # noqa: F401
