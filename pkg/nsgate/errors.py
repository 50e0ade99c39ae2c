from typing import Optional, Tuple


class NsgateError(Exception):
    """Base class for every error raised by nsgate."""


class DimensionMismatchError(NsgateError, ValueError):
    pass


class NonHermitianError(NsgateError, ValueError):
    def __init__(self, deviation: float, tolerance: float) -> None:
        super().__init__(f"matrix is not Hermitian: |M - M^dag|_F = {deviation:.3e} > {tolerance:.1e}")
        self.deviation = deviation
        self.tolerance = tolerance


class NegativeEigenvalueError(NsgateError, ValueError):
    def __init__(self, eigenvalue: float, tolerance: float) -> None:
        super().__init__(f"state has eigenvalue {eigenvalue:.3e} below -{tolerance:.1e}")
        self.eigenvalue = eigenvalue
        self.tolerance = tolerance


class InvalidRegisterError(NsgateError, ValueError):
    pass


class DegeneracyError(NsgateError, RuntimeError):
    pass


class StructureViolationError(NsgateError, RuntimeError):
    def __init__(self, msg: str, element: Optional[Tuple[int, ...]] = None, value: float = 0.0) -> None:
        if element is not None:
            msg = f"{msg} (element {element}: {value:.3e})"
        super().__init__(msg)
        self.element = element
        self.value = value


class InvalidPulseError(NsgateError, ValueError):
    pass


class ConvergenceError(NsgateError, RuntimeError):
    pass


class InsufficientDataError(NsgateError, ValueError):
    pass


class ConfigError(NsgateError, ValueError):
    pass


class VerificationError(NsgateError, RuntimeError):
    pass
