"""Exception types shared by the solvers."""


class CmelabError(Exception):
    """Base class for all numerical and input failures raised by cmelab."""


class NoConvergence(CmelabError):
    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class SingularJacobian(CmelabError):
    pass


class BranchNotPresent(CmelabError):
    pass


class InvalidRegime(CmelabError):
    pass


# solver-level name for the same condition
RegimeInvalid = InvalidRegime


class DomainTooSmall(CmelabError):
    pass
