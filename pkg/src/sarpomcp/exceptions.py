"""Exceptions for SarPomcp."""


class SarPomcpError(Exception):
    """Generic exception."""


class DomainError(SarPomcpError, ValueError):
    """Raised when an operation is called outside its domain."""


class ConfigurationError(SarPomcpError):
    """Raised when a scenario or experiment configuration is invalid."""


class PlanningError(SarPomcpError):
    """Raised when a planner cannot produce a plan."""


class BoxedInError(PlanningError):
    """Raised when the agent has no legal action at its current altitude."""
