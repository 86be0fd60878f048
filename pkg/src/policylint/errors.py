"""Shared exception hierarchy.

Every module-specific error derives from PolicyLintError so callers (CLI,
HTTP service) can map any domain failure to a single diagnostic path.
"""


class PolicyLintError(Exception):
    """Base class for all policylint domain errors."""
