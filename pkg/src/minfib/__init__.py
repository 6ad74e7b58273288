"""Minimal fibrations of finite diagrams of simplicial sets, at desk scale."""
__version__ = "0.1.0"
