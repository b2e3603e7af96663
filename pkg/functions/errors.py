class CatStokesError(Exception):
    """Base class for every failure raised by the library"""


class InputError(CatStokesError):
    """Malformed user input (bad JSON, wrong shape, non-Hermitian matrix)"""


class DomainError(CatStokesError):
    """Argument outside the domain of the operation"""


class NonGenericError(CatStokesError):
    def __init__(self, level, detail=""):
        self.level = level
        message = f"non-generic: eigenvalue collision at level {level}"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)


class NotPositiveDefiniteError(CatStokesError):
    """Non-positive pivot or eigenvalue where a positive definite matrix is required"""


class PoleError(CatStokesError):
    def __init__(self, z, nearest):
        self.z = z
        self.nearest = nearest
        super().__init__(f"Gamma argument {z} is within tolerance of the pole at {nearest}")


class ConvergenceError(CatStokesError):
    """Iterative or matching procedure did not reach its tolerance"""


class SingularBlockError(CatStokesError):
    def __init__(self, index, cond):
        self.index = index
        self.cond = cond
        super().__init__(f"leading block {index} is singular (condition number {cond:.3e})")


class IntegrationError(CatStokesError):
    def __init__(self, location, detail=""):
        self.location = location
        super().__init__(f"integration failed at {location}: {detail}")


class ConsistencyError(CatStokesError):
    """An internal invariant broke; indicates formula misuse rather than bad input"""


class DimensionCapError(CatStokesError):
    def __init__(self, dim, cap):
        self.dim = dim
        self.cap = cap
        super().__init__(f"representation dimension {dim} exceeds cap {cap}")
