"""Shared exception types."""


class CapacityError(ValueError):
    """A requested computation exceeds the documented desk-scale limits."""
