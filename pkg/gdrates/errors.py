class DomainError(ValueError):
    """An argument lies outside the range where a formula is defined."""


class PreconditionError(ValueError):
    """A lemma or construction was applied outside its validity range."""


class SolverError(RuntimeError):
    """A scalar root or maximizer search did not converge."""
