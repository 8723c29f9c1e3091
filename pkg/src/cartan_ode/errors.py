"""Exception hierarchy shared by all modules."""


class CartanError(Exception):
    """Base class for every error raised by this package."""

    code = "error"


class ZeroDenominator(CartanError, ZeroDivisionError):
    code = "zero-denominator"

    def __init__(self, message: str = "zero denominator"):
        super().__init__(message)


class UnboundSymbol(CartanError):
    code = "unbound-symbol"

    def __init__(self, name: str):
        super().__init__(f"unbound symbol {name}")
        self.name = name


class SingularEvaluation(CartanError):
    """A division by zero met while evaluating at a concrete point."""

    code = "singular-evaluation"

    def __init__(self, subexpr):
        super().__init__(f"singular evaluation at {subexpr}")
        self.subexpr = subexpr


class UnsupportedComposition(CartanError):
    code = "unsupported-composition"


class InternalConsistencyError(CartanError):
    code = "internal"


class AbsorptionFailure(InternalConsistencyError):
    code = "absorption-failure"


class ClassificationContradiction(InternalConsistencyError):
    code = "classification-contradiction"


class DegenerateCoframe(CartanError):
    code = "degenerate-coframe"


class ChartMismatch(CartanError):
    code = "chart-mismatch"


class NoValidSamples(CartanError):
    code = "no-valid-samples"


class InvalidMap(CartanError):
    code = "invalid-map"


class ParseError(CartanError):
    code = "parse"

    def __init__(self, message: str, line: int = 1, column: int = 1, source: str = "<input>"):
        super().__init__(f"{source}:{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column
        self.source = source


class ExprSyntaxError(ParseError):
    code = "syntax"


class UndeclaredIdentifier(ParseError):
    code = "undeclared"


class DuplicateDeclaration(ParseError):
    code = "duplicate"


class ReservedName(ParseError):
    code = "reserved"
