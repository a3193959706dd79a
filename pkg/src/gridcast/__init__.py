"""gridcast: multi-level day-ahead electric load forecasting."""

__version__ = "0.1.0"
