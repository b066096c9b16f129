"""Exception hierarchy shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


class ArgumentError(ToolkitError):
    """Invalid argument values (dimension mismatches, empty inputs, bad weights)."""


class FormatError(ToolkitError):
    """Malformed file contents (bad magic, inconsistent dimensions, parse failures)."""


class LookupError_(ToolkitError):
    """A required embedding or index is missing from a store."""


class DegenerateInputError(ToolkitError):
    """Input admits no meaningful result (all-zero difference matrix, constant vector)."""
