"""Shared exception types."""


class DataFormatError(ValueError):
    """A file on disk is missing, malformed, or violates a dataset invariant."""
