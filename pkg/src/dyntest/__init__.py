"""Search-based unit test generation for a small dynamically typed language."""

__version__ = "0.1.0"
