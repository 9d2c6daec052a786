"""Weighted multivariate polynomials with exact rational coefficients."""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, reduce
from math import gcd
from typing import Iterable, Mapping, Sequence

import numpy as np
from lark import Lark, Token, Transformer
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedToken, VisitError

from .errors import (
    InvalidVarSystem,
    NotQuasiHomogeneous,
    PolynomialSyntaxError,
    UnknownVariable,
    ZeroDenominator,
    ZeroPolynomial,
)

logger = logging.getLogger(__name__)

Exponent = tuple[int, ...]


@dataclass(frozen=True)
class VarSystem:
    """Ordered variables with positive weights and the degree `d` of the potential.

    Use `VarSystem.create` for a top-level system; it also checks that the weights are coprime.
    Fixed-locus subsystems (see `subsystem`) keep the parent's weights and may share a common factor.
    """

    names: tuple[str, ...]
    weights: tuple[int, ...]
    d: int

    def __post_init__(self):
        if len(self.names) != len(self.weights):
            raise InvalidVarSystem(f"{len(self.names)} names but {len(self.weights)} weights.")
        if any(w < 1 for w in self.weights):
            raise InvalidVarSystem(f"Weights must be positive, got {self.weights}.")
        if self.d < 1:
            raise InvalidVarSystem(f"Degree must be positive, got {self.d}.")
        if len(set(self.names)) != len(self.names):
            raise InvalidVarSystem(f"Variable names must be unique, got {self.names}.")
        bad = [name for name in self.names if not name.isidentifier()]
        if bad:
            raise InvalidVarSystem(f"Invalid variable names {bad}.")

    @classmethod
    def create(cls, names: Sequence[str], weights: Sequence[int], d: int) -> "VarSystem":
        """Create a variable system and check gcd(a_0, ..., a_n) = 1."""
        system = cls(tuple(names), tuple(int(w) for w in weights), int(d))
        if system.weights and reduce(gcd, system.weights) != 1:
            raise InvalidVarSystem(f"Weights {system.weights} are not coprime.")
        return system

    @property
    def nvars(self) -> int:
        return len(self.names)

    @property
    def weight_sum(self) -> int:
        return sum(self.weights)

    @property
    def socle_degree(self) -> int:
        """Top degree of the Jacobian ring of an isolated singularity, sum of d - 2a_i."""
        return sum(self.d - 2 * a for a in self.weights)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def subsystem(self, keep: Iterable[int]) -> "VarSystem":
        """The variable system of the coordinates in `keep`, in the original order."""
        keep = sorted(set(keep))
        return VarSystem(
            tuple(self.names[i] for i in keep),
            tuple(self.weights[i] for i in keep),
            self.d,
        )

    def exponent_degree(self, exponent: Exponent) -> int:
        return sum(e * a for e, a in zip(exponent, self.weights))


def _term_key(vars: VarSystem, exponent: Exponent) -> tuple:
    # Descending weighted degree, then descending lexicographic order.
    return (-vars.exponent_degree(exponent), tuple(-e for e in exponent))


@dataclass(frozen=True)
class Polynomial:
    """A polynomial as canonically ordered `(exponent, coefficient)` pairs. Zero coefficients are never stored."""

    vars: VarSystem
    terms: tuple[tuple[Exponent, Fraction], ...] = ()
    _lookup: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        for exponent, _ in self.terms:
            if len(exponent) != self.vars.nvars:
                raise ValueError(f"Exponent {exponent} does not match {self.vars.nvars} variables.")
        object.__setattr__(self, "_lookup", dict(self.terms))

    @classmethod
    def from_terms(
        cls,
        vars: VarSystem,
        terms: Mapping[Exponent, Fraction | int] | Iterable[tuple[Exponent, Fraction | int]],
    ) -> "Polynomial":
        """Combine like terms, drop zeros and sort into canonical order."""
        items = terms.items() if isinstance(terms, Mapping) else terms
        combined: dict[Exponent, Fraction] = {}
        for exponent, coefficient in items:
            exponent = tuple(int(e) for e in exponent)
            combined[exponent] = combined.get(exponent, Fraction(0)) + Fraction(coefficient)
        ordered = sorted(
            ((e, c) for e, c in combined.items() if c != 0),
            key=lambda term: _term_key(vars, term[0]),
        )
        return cls(vars, tuple(ordered))

    @classmethod
    def zero(cls, vars: VarSystem) -> "Polynomial":
        return cls(vars, ())

    @classmethod
    def monomial(cls, vars: VarSystem, exponent: Exponent, coefficient: Fraction | int = 1) -> "Polynomial":
        return cls.from_terms(vars, [(exponent, coefficient)])

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, exponent: Exponent) -> Fraction:
        return self._lookup.get(tuple(exponent), Fraction(0))

    def as_dict(self) -> dict[Exponent, Fraction]:
        return dict(self.terms)

    def exponents(self) -> np.ndarray:
        """Exponent vectors as an integer array with shape `(terms, nvars)`."""
        return np.array([e for e, _ in self.terms], dtype=np.int64).reshape(len(self.terms), self.vars.nvars)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        _check_same_system(self, other)
        return Polynomial.from_terms(self.vars, list(self.terms) + list(other.terms))

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.vars, tuple((e, -c) for e, c in self.terms))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other: "Polynomial | Fraction | int") -> "Polynomial":
        if isinstance(other, Polynomial):
            return poly_mul(self, other)
        scale = Fraction(other)
        return Polynomial.from_terms(self.vars, [(e, c * scale) for e, c in self.terms])

    __rmul__ = __mul__

    def derivative(self, i: int) -> "Polynomial":
        """Formal partial derivative with respect to variable `i`."""
        terms = []
        for exponent, coefficient in self.terms:
            if exponent[i] == 0:
                continue
            lowered = exponent[:i] + (exponent[i] - 1,) + exponent[i + 1 :]
            terms.append((lowered, coefficient * exponent[i]))
        return Polynomial.from_terms(self.vars, terms)

    def project(self, keep: Iterable[int]) -> "Polynomial":
        """Rewrite a polynomial supported on `keep` in the variable system `vars.subsystem(keep)`."""
        keep = sorted(set(keep))
        sub = self.vars.subsystem(keep)
        terms = []
        for exponent, coefficient in self.terms:
            if any(e for i, e in enumerate(exponent) if i not in keep):
                raise ValueError(f"Term {exponent} involves variables outside {keep}.")
            terms.append((tuple(exponent[i] for i in keep), coefficient))
        return Polynomial.from_terms(sub, terms)

    def embed(self, parent: VarSystem, keep: Sequence[int]) -> "Polynomial":
        """Inverse of `project`: place a subsystem polynomial back into `parent`."""
        keep = sorted(set(keep))
        terms = []
        for exponent, coefficient in self.terms:
            full = [0] * parent.nvars
            for position, e in zip(keep, exponent):
                full[position] = e
            terms.append((tuple(full), coefficient))
        return Polynomial.from_terms(parent, terms)

    def __str__(self) -> str:
        return render(self)


def _check_same_system(p: Polynomial, q: Polynomial):
    if p.vars != q.vars:
        raise ValueError("Polynomials live in different variable systems.")


def poly_mul(p: Polynomial, q: Polynomial) -> Polynomial:
    """Exact product of two polynomials in the same variable system."""
    _check_same_system(p, q)
    if p.is_zero or q.is_zero:
        return Polynomial.zero(p.vars)

    # All pairwise exponent sums and coefficient products at once.
    exponents = p.exponents()[:, np.newaxis, :] + q.exponents()[np.newaxis, :, :]
    coefficients = np.multiply.outer(
        np.array([c for _, c in p.terms], dtype=object),
        np.array([c for _, c in q.terms], dtype=object),
    )
    exponents = exponents.reshape(len(p.terms) * len(q.terms), p.vars.nvars)
    terms = zip(map(tuple, exponents.tolist()), coefficients.ravel().tolist())
    return Polynomial.from_terms(p.vars, terms)


def weighted_degree(p: Polynomial, vars: VarSystem | None = None) -> int:
    """Weighted degree of a quasi-homogeneous polynomial.

    Raises:
        ZeroPolynomial: If `p` is zero.
        NotQuasiHomogeneous: If two terms have different weighted degrees. Both terms are reported.
    """
    vars = p.vars if vars is None else vars
    if p.is_zero:
        raise ZeroPolynomial("The zero polynomial has no weighted degree.")

    degrees = p.exponents() @ np.asarray(vars.weights, dtype=np.int64)
    mismatched = np.flatnonzero(degrees != degrees[0])
    if mismatched.size:
        other = int(mismatched[0])
        raise NotQuasiHomogeneous(
            (p.terms[0][0], p.terms[other][0]),
            (int(degrees[0]), int(degrees[other])),
        )
    return int(degrees[0])


def is_quasi_homogeneous(p: Polynomial) -> bool:
    try:
        weighted_degree(p)
    except (NotQuasiHomogeneous, ZeroPolynomial):
        return False
    return True


def restrict(p: Polynomial, keep: Iterable[int]) -> Polynomial:
    """Drop every term involving a variable outside `keep`. The result stays in `p.vars`."""
    keep = set(keep)
    return Polynomial(
        p.vars,
        tuple((e, c) for e, c in p.terms if all(i in keep for i, power in enumerate(e) if power)),
    )


@lru_cache(maxsize=None)
def monomials_of_degree(weights: tuple[int, ...], e: int) -> tuple[Exponent, ...]:
    """All exponent vectors of weighted degree `e`, in descending lexicographic order."""
    if e < 0:
        return ()
    if not weights:
        return ((),) if e == 0 else ()

    head, tail = weights[0], weights[1:]
    result = []
    for power in range(e // head, -1, -1):
        for rest in monomials_of_degree(tail, e - power * head):
            result.append((power,) + rest)
    return tuple(result)


# ---------------------------------------------------------------------------
# Text format.

_GRAMMAR = r"""
    start: term ((PLUS | MINUS) term)*

    term: coeff "*" factor ("*" factor)*  -> scaled
        | factor ("*" factor)*            -> unscaled
        | coeff                           -> constant

    factor: NAME ("^" UINT)?
    coeff: MINUS? UINT ("/" UINT)?

    PLUS: "+"
    MINUS: "-"
    NAME: /[A-Za-z_][A-Za-z0-9_]*/
    UINT: /[0-9]+/

    %import common.WS
    %ignore WS
"""

_parser = Lark(_GRAMMAR, parser="lalr", propagate_positions=False, maybe_placeholders=False)


class _PolynomialBuilder(Transformer):
    """Turns a parse tree into `(exponent, coefficient)` terms."""

    def __init__(self, vars: VarSystem, text: str):
        super().__init__()
        self._vars = vars
        self._text = text
        self._index = {name: i for i, name in enumerate(vars.names)}

    def _unit(self) -> list[int]:
        return [0] * self._vars.nvars

    def coeff(self, children: list[Token]) -> Fraction:
        sign = 1
        if children[0].type == "MINUS":
            sign = -1
            children = children[1:]
        numerator = int(children[0])
        denominator = 1
        if len(children) > 1:
            denominator = int(children[1])
            if denominator == 0:
                raise ZeroDenominator(children[1].start_pos, self._text)
        return Fraction(sign * numerator, denominator)

    def factor(self, children: list[Token]) -> list[int]:
        name = children[0]
        if str(name) not in self._index:
            raise UnknownVariable(str(name), name.start_pos, self._text)
        exponent = self._unit()
        exponent[self._index[str(name)]] = int(children[1]) if len(children) > 1 else 1
        return exponent

    def _product(self, factors: list[list[int]]) -> Exponent:
        return tuple(int(sum(column)) for column in zip(*factors)) if factors else tuple(self._unit())

    def scaled(self, children):
        return self._product(children[1:]), children[0]

    def unscaled(self, children):
        return self._product(children), Fraction(1)

    def constant(self, children):
        return tuple(self._unit()), children[0]

    def start(self, children):
        terms = [children[0]]
        for sign, (exponent, coefficient) in zip(children[1::2], children[2::2]):
            terms.append((exponent, -coefficient if sign.type == "MINUS" else coefficient))
        return terms


def parse_poly(text: str, vars: VarSystem) -> Polynomial:
    """Parse polynomial text such as `"x1^4 + 2*x1^2*x2^2 - 1/3*x5^2"`.

    Grammar: `poly := term (('+'|'-') term)*`, `term := [coeff '*'] factor ('*' factor)* | coeff`,
    `factor := var ['^' uint]`, `coeff := ['-'] uint ['/' uint]`. Whitespace is ignored.

    Raises:
        PolynomialSyntaxError: With the offset of the offending input.
        UnknownVariable: If a name is not in `vars.names`.
        ZeroDenominator: If a coefficient has denominator zero.
    """
    try:
        tree = _parser.parse(text)
    except UnexpectedToken as ex:
        if ex.token.type == "$END":
            raise PolynomialSyntaxError("unexpected end of input", len(text.rstrip()), text) from None
        raise PolynomialSyntaxError(f"unexpected token {str(ex.token)!r}", ex.token.start_pos, text) from None
    except UnexpectedCharacters as ex:
        raise PolynomialSyntaxError(
            f"unexpected character {text[ex.pos_in_stream]!r}", ex.pos_in_stream, text
        ) from None
    except UnexpectedEOF:
        raise PolynomialSyntaxError("unexpected end of input", len(text.rstrip()), text) from None

    try:
        terms = _PolynomialBuilder(vars, text).transform(tree)
    except VisitError as ex:
        raise ex.orig_exc from None

    return Polynomial.from_terms(vars, terms)


def _format_coefficient(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _format_monomial(vars: VarSystem, exponent: Exponent) -> str:
    factors = []
    for name, power in zip(vars.names, exponent):
        if power == 1:
            factors.append(name)
        elif power > 1:
            factors.append(f"{name}^{power}")
    return "*".join(factors)


def render(p: Polynomial) -> str:
    """Canonical text of `p`; `parse_poly(render(p), p.vars) == p`."""
    if p.is_zero:
        return "0"

    parts = []
    for position, (exponent, coefficient) in enumerate(p.terms):
        monomial = _format_monomial(p.vars, exponent)
        magnitude = abs(coefficient)
        if position == 0:
            # A leading sign can only be carried by the coefficient.
            shown = coefficient
            sign = ""
        else:
            shown = magnitude
            sign = " - " if coefficient < 0 else " + "

        if not monomial:
            body = _format_coefficient(shown)
        elif shown == 1:
            body = monomial
        else:
            body = f"{_format_coefficient(shown)}*{monomial}"
        parts.append(sign + body)
    return "".join(parts)
