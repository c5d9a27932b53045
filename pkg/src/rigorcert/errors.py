"""Exception types shared by the kernels and the public modules."""


class DivByZeroInterval(ArithmeticError):
    """Division by an interval that contains zero."""


class DomainError(ValueError):
    """An elementary function was applied outside its domain."""


class NotExact(ValueError):
    """An exact rational value does not exist or cannot be computed."""


class UndefinedPoint(ArithmeticError):
    """Exact evaluation hit a division by zero or a negative square root."""


class NotDifferentiable(ValueError):
    """Symbolic differentiation reached a node with no derivative rule (abs)."""


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"{line}:{column}: {message}" if line else message)
        self.message = message
        self.line = line
        self.column = column


class DuplicateId(ParseError):
    pass


class FormatError(ValueError):
    """Malformed certificate bytes."""
