"""Numerical models of lifted spectral triples over Cuntz-Pimsner algebras."""
from __future__ import annotations

__version__ = "0.1.0"
