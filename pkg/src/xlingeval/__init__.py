"""Unsupervised cross-lingual MT evaluation toolkit."""

__version__ = "0.1.0"
