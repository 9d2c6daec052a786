"""Graded Jacobian rings Jac(w) = k[x] / (dw/dx_0, ..., dw/dx_n).

Graded pieces are computed one degree at a time: all monomials of the degree span the columns, the
multiples `m * dw/dx_i` of that degree span the rows, and after row reduction the non-pivot monomials
form the basis. No global Groebner basis is ever computed.
"""

import logging
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from . import linalg
from .errors import NonIsolatedSingularity, NonPolynomialSeries
from .linalg import ExactMatrix
from .wpoly import Exponent, Polynomial, VarSystem, monomials_of_degree, weighted_degree

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GradedPiece:
    """One weighted degree of a Jacobian ring.

    Attributes:
        degree: The weighted degree `e`.
        monomials: Every monomial of degree `e`, in canonical order.
        basis: The monomials whose classes form a basis of Jac_e, in canonical order.
        reduction: Coordinates, in `basis`, of the class of each monomial in `monomials`.
    """

    degree: int
    monomials: tuple[Exponent, ...]
    basis: tuple[Exponent, ...]
    reduction: Mapping[Exponent, tuple[Fraction, ...]] = field(repr=False, compare=False)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def monomial_coordinates(self, exponent: Exponent) -> tuple[Fraction, ...]:
        return self.reduction[tuple(exponent)]

    def coordinates(self, p: Polynomial) -> tuple[Fraction, ...]:
        """Coordinates of the class of `p`, all of whose terms must have degree `self.degree`."""
        result = [Fraction(0)] * self.dim
        for exponent, coefficient in p.terms:
            if exponent not in self.reduction:
                raise ValueError(f"Term {exponent} does not have degree {self.degree}.")
            for k, x in enumerate(self.reduction[exponent]):
                if x:
                    result[k] += coefficient * x
        return tuple(result)

    def polynomial(self, vars: VarSystem, coords: tuple[Fraction, ...]) -> Polynomial:
        """The representative `sum coords[k] * basis[k]`."""
        if len(coords) != self.dim:
            raise ValueError(f"Expected {self.dim} coordinates, got {len(coords)}.")
        return Polynomial.from_terms(vars, zip(self.basis, coords))


@dataclass
class JacobianRing:
    """The Jacobian ring of a quasi-homogeneous polynomial, with a write-once cache of graded pieces.

    Once `milnor_number` has certified the ring finite, pieces above the socle degree are known to vanish.
    """

    vars: VarSystem
    omega: Polynomial
    partials: tuple[Polynomial, ...]
    socle_degree: int
    modulus: int | str | None = None
    certified: bool = False
    piece_cache: dict[int, GradedPiece] = field(default_factory=dict, repr=False, compare=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def __getstate__(self):
        state = self.__dict__.copy()
        del state["_lock"]
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._lock = threading.Lock()


def build_jacobian(omega: Polynomial, vars: VarSystem | None = None, modulus: int | str | None = None) -> JacobianRing:
    """Build the Jacobian ring of `omega`.

    Args:
        omega: A quasi-homogeneous polynomial of weighted degree `vars.d`, or zero on any variable system.
        vars: The variable system, `omega.vars` by default.
        modulus: Optional prime (or `"random"`) for the modular rank shortcut in high degrees.
    Returns:
        J: The ring. Pieces are computed lazily.
    """
    vars = omega.vars if vars is None else vars
    if omega.vars != vars:
        raise ValueError("omega does not live in the given variable system.")
    if not omega.is_zero:
        degree = weighted_degree(omega)
        if degree != vars.d:
            raise ValueError(f"omega has weighted degree {degree}, expected d = {vars.d}.")

    partials = tuple(omega.derivative(i) for i in range(vars.nvars))
    logger.debug(f"Jacobian ring of {omega} on {vars.names}: socle degree {vars.socle_degree}.")
    return JacobianRing(vars, omega, partials, vars.socle_degree, modulus)


def _relations(J: JacobianRing, e: int, columns: Mapping[Exponent, int]) -> ExactMatrix:
    """Rows `m * dw/dx_i` for every monomial `m` of degree `e - (d - a_i)`."""
    triplets = []
    row = 0
    for i, partial in enumerate(J.partials):
        if partial.is_zero:
            continue
        offsets = partial.exponents()
        coefficients = [c for _, c in partial.terms]
        for multiplier in monomials_of_degree(J.vars.weights, e - (J.vars.d - J.vars.weights[i])):
            shifted = offsets + np.asarray(multiplier, dtype=np.int64)
            for exponent, coefficient in zip(map(tuple, shifted.tolist()), coefficients):
                triplets.append((row, columns[exponent], coefficient))
            row += 1
    return ExactMatrix.from_triplets(row, len(columns), triplets)


def _compute_piece(J: JacobianRing, e: int) -> GradedPiece:
    monomials = monomials_of_degree(J.vars.weights, e)
    columns = {m: k for k, m in enumerate(monomials)}
    if J.certified and e > J.socle_degree:
        return GradedPiece(e, monomials, (), {m: () for m in monomials})

    relations = _relations(J, e, columns)

    if J.modulus is not None and relations.rows and linalg.rank(relations, modulus=J.modulus) == len(monomials):
        # Everything of this degree lies in the ideal.
        return GradedPiece(e, monomials, (), {m: () for m in monomials})

    R, pivots = linalg.row_reduce(relations)
    pivot_rows = {c: i for i, c in enumerate(pivots)}
    free = [k for k in range(len(monomials)) if k not in pivot_rows]
    basis = tuple(monomials[k] for k in free)

    reduction = {}
    for k, m in enumerate(monomials):
        if k in pivot_rows:
            i = pivot_rows[k]
            # m is congruent to minus the free part of its relation row.
            reduction[m] = tuple(-R[i, f] for f in free)
        else:
            reduction[m] = tuple(Fraction(int(f == k)) for f in free)
    logger.debug(f"Jac_{e}: {len(monomials)} monomials, {relations.rows} relations, dim {len(basis)}.")
    return GradedPiece(e, monomials, basis, reduction)


def graded_piece(J: JacobianRing, e: int) -> GradedPiece:
    """The degree `e` piece of `J`, computed once and cached."""
    piece = J.piece_cache.get(e)
    if piece is not None:
        return piece

    piece = _compute_piece(J, e)
    with J._lock:
        # Racing writers compute identical pieces; the first one wins.
        return J.piece_cache.setdefault(e, piece)


def hilbert_function(J: JacobianRing, top: int | None = None) -> list[int]:
    """`dim Jac_e` for `0 <= e <= top` (the socle degree by default)."""
    top = J.socle_degree if top is None else top
    return [graded_piece(J, e).dim for e in range(top + 1)]


def hilbert_oracle(vars: VarSystem) -> list[int]:
    """Coefficients of `prod_i (1 - t^(d - a_i)) / (1 - t^(a_i))`, valid when the partials form a regular sequence.

    Raises:
        NonPolynomialSeries: If the product is not a polynomial (in particular when some `d <= a_i`).
    """
    d = vars.d
    if any(d <= a for a in vars.weights):
        raise NonPolynomialSeries(f"Degree {d} does not exceed every weight {vars.weights}.")

    numerator = np.array([1], dtype=np.int64)
    for a in vars.weights:
        factor = np.zeros(d - a + 1, dtype=np.int64)
        factor[0], factor[-1] = 1, -1
        numerator = np.convolve(numerator, factor)

    # Series division by each (1 - t^a): q_k += q_(k-a), lowest degree first.
    series = numerator.copy()
    for a in vars.weights:
        for k in range(a, len(series)):
            series[k] += series[k - a]

    sigma = vars.socle_degree
    if sigma < 0 or any(series[sigma + 1 :]):
        raise NonPolynomialSeries(f"Hilbert series for weights {vars.weights}, d = {d} is not a polynomial.")
    return [int(x) for x in series[: sigma + 1]]


def milnor_number(J: JacobianRing) -> int:
    """Total dimension of `J`, certified finite.

    Every degree in `(socle, socle + max a_i]` must vanish; any monomial of higher degree is divisible by one of
    that window, so then all higher pieces vanish too.

    Raises:
        NonIsolatedSingularity: If a degree of the certification window is nonzero.
    """
    window = range(J.socle_degree + 1, J.socle_degree + max(J.vars.weights, default=0) + 1)
    for e in window:
        dim = graded_piece(J, e).dim
        if dim:
            raise NonIsolatedSingularity(e, dim)
    J.certified = True
    return sum(hilbert_function(J))


def normal_form(J: JacobianRing, p: Polynomial) -> tuple[Fraction, ...]:
    """Coordinates of the class of the quasi-homogeneous `p` in the basis of `graded_piece(J, deg p)`.

    The zero polynomial has no degree; reduce it with `graded_piece(J, e).coordinates` instead.
    """
    return graded_piece(J, weighted_degree(p)).coordinates(p)


def multiply_classes(
    J: JacobianRing, e1: int, x: tuple[Fraction, ...], e2: int, y: tuple[Fraction, ...]
) -> tuple[Fraction, ...]:
    """Product of the classes with coordinates `x` in Jac_e1 and `y` in Jac_e2, in Jac_(e1 + e2)."""
    left, right, target = graded_piece(J, e1), graded_piece(J, e2), graded_piece(J, e1 + e2)
    result = [Fraction(0)] * target.dim
    for m1, a in zip(left.basis, x):
        if not a:
            continue
        for m2, b in zip(right.basis, y):
            if not b:
                continue
            product = tuple(u + v for u, v in zip(m1, m2))
            for k, c in enumerate(target.monomial_coordinates(product)):
                if c:
                    result[k] += a * b * c
    return tuple(result)


def pairing_rank(J: JacobianRing, e1: int, e2: int, modulus: int | str | None = None) -> tuple[ExactMatrix, int]:
    """Matrix and rank of `Jac_e1 -> Hom(Jac_e2, Jac_(e1 + e2))` induced by multiplication.

    Rows are indexed by `(r, s)` with `r` a basis index of Jac_e2 and `s` of Jac_(e1 + e2), flattened as
    `r * dim Jac_(e1 + e2) + s`; columns by the basis of Jac_e1.
    """
    left, right, target = graded_piece(J, e1), graded_piece(J, e2), graded_piece(J, e1 + e2)
    triplets = []
    for c, m1 in enumerate(left.basis):
        for r, m2 in enumerate(right.basis):
            product = tuple(u + v for u, v in zip(m1, m2))
            for s, value in enumerate(target.monomial_coordinates(product)):
                if value:
                    triplets.append((r * target.dim + s, c, value))
    matrix = ExactMatrix.from_triplets(right.dim * target.dim, left.dim, triplets)
    return matrix, linalg.rank(matrix, modulus=modulus)
