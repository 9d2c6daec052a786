"""Exceptions raised by the hochschild_serre package."""

from typing import Sequence


class HochschildSerreError(Exception):
    """Base class for all errors raised by this package."""


class PolynomialSyntaxError(HochschildSerreError, ValueError):
    """Polynomial text does not conform to the grammar."""

    def __init__(self, message: str, position: int, text: str = ""):
        super().__init__(f"{message} at offset {position}")
        self.position = position
        self.text = text


class UnknownVariable(PolynomialSyntaxError):
    """Polynomial text uses a name that is not declared."""

    def __init__(self, name: str, position: int, text: str = ""):
        super().__init__(f"unknown variable '{name}'", position, text)
        self.name = name


class ZeroDenominator(PolynomialSyntaxError):
    """A rational coefficient has denominator zero."""

    def __init__(self, position: int, text: str = ""):
        super().__init__("zero denominator in coefficient", position, text)


class InvalidVarSystem(HochschildSerreError, ValueError):
    """Variable names, weights or degree are inconsistent."""


class NotQuasiHomogeneous(HochschildSerreError, ValueError):
    """Two terms of a polynomial have different weighted degrees."""

    def __init__(self, terms: Sequence[tuple[int, ...]], degrees: Sequence[int]):
        first, second = terms
        super().__init__(
            f"terms {first} and {second} have weighted degrees {degrees[0]} and {degrees[1]}"
        )
        self.terms = tuple(terms)
        self.degrees = tuple(degrees)


class ZeroPolynomial(HochschildSerreError, ValueError):
    """The zero polynomial has no weighted degree."""


class NonPolynomialSeries(HochschildSerreError, ArithmeticError):
    """The Hilbert series product does not truncate to a polynomial."""


class NonIsolatedSingularity(HochschildSerreError, ArithmeticError):
    """A Jacobian ring is not finite dimensional."""

    def __init__(self, degree: int, dim: int, sector: int | None = None):
        where = "" if sector is None else f" in sector j={sector}"
        super().__init__(
            f"Jacobian ring{where} has dimension {dim} in degree {degree}, beyond the socle window"
        )
        self.degree = degree
        self.dim = dim
        self.sector = sector


class IndeterminateComposition(HochschildSerreError, ArithmeticError):
    """A twisted-sector composition term cannot be evaluated from the available data."""

    def __init__(self, terms: Sequence[tuple[int, int, int]]):
        listed = ", ".join(f"f[j={j}] o g[j={r}] -> target j={k}" for j, r, k in terms)
        super().__init__(f"unresolved twisted composition terms: {listed}")
        self.terms = tuple(terms)


class InputSpecError(HochschildSerreError, ValueError):
    """An input description file is malformed."""


class NoSmoothMember(HochschildSerreError, ArithmeticError):
    """Random perturbation did not produce a member with the required Milnor number."""
