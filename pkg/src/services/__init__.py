"""Numerical services for dyncoh."""

from . import conic, matcore, measures, protocols, qobj, serialization, suites, supermap

__all__ = ["conic", "matcore", "measures", "protocols", "qobj", "serialization", "suites", "supermap"]
