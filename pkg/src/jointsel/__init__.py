"""Joint longitudinal-survival models with bi-level feature selection."""

__version__ = "0.1.0"
