"""Équilibres de Nash d'exécution optimale sous impact de prix transitoire."""

__version__ = "0.1.0"

__all__ = ["app", "engine", "sim", "solvers"]
