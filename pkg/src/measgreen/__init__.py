"""Linear algebra for first-order systems ``J u' + q u = w f`` with atomic measures."""

__version__ = "0.1.0"
