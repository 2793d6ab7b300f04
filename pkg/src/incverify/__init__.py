"""Incremental syntactic-semantic verification over operator-precedence grammars."""

__version__ = "0.1.0"
