"""Executable combinatorics of invariant random subgroups of strictly diagonal
limits of finite symmetric groups."""

__version__ = "0.1.0"
