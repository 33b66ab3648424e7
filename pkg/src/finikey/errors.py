class DomainError(ValueError):
    """An argument lies outside the domain of a bound or rate formula."""


class InvalidStateError(ValueError):
    """An operator is not a valid density operator (or a λ-vector is not a distribution)."""


class InfeasibleError(ValueError):
    """No Bell-diagonal state satisfies the parameter-estimation constraints."""
