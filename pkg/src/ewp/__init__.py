"""Electronic working papers: evidence vault, Controlled Statement chains and
draft report assembly."""

__version__ = "0.1.0"
