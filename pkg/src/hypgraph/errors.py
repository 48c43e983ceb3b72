class HypGraphError(Exception):
    """Base class for all errors raised by hypgraph."""


class DomainError(HypGraphError, ValueError):
    """Input outside the mathematical domain of an operation."""


class ParameterError(HypGraphError, ValueError):
    """Invalid model or experiment parameters."""


class ContractError(HypGraphError, ValueError):
    """A precondition on the shape or ordering of the input was violated."""


class ResourceError(HypGraphError, RuntimeError):
    """The requested computation exceeds a configured size cap."""
