"""Exact linear algebra over the rationals.

Matrices are reduced by fraction-free elimination on integer rows (denominators cleared row by row),
keeping every row primitive so coefficients stay small. Row operations are vectorised over numpy
object arrays of Python integers; no floating point is involved anywhere.
"""

import logging
import random
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_PRIME_BITS = 62
MAX_PRIME_BITS = 62
# Residues below this bound multiply without overflowing int64.
_INT64_PRIME_BOUND = 1 << 31
_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


@dataclass(frozen=True)
class ExactMatrix:
    """A dense `rows` by `cols` matrix of rationals stored in row-major order."""

    rows: int
    cols: int
    entries: tuple[Fraction, ...]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ValueError(f"Invalid matrix shape ({self.rows}, {self.cols}).")
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(f"Expected {self.rows * self.cols} entries, got {len(self.entries)}.")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Fraction | int]], cols: int | None = None) -> "ExactMatrix":
        if cols is None:
            cols = len(rows[0]) if rows else 0
        entries = []
        for row in rows:
            if len(row) != cols:
                raise ValueError(f"Row of length {len(row)} in a matrix with {cols} columns.")
            entries.extend(Fraction(x) for x in row)
        return cls(len(rows), cols, tuple(entries))

    @classmethod
    def from_triplets(
        cls, rows: int, cols: int, triplets: Iterable[tuple[int, int, Fraction | int]]
    ) -> "ExactMatrix":
        """Build a matrix from sparse `(row, col, value)` triplets; repeated positions are summed."""
        entries = [Fraction(0)] * (rows * cols)
        for i, j, value in triplets:
            if not (0 <= i < rows and 0 <= j < cols):
                raise ValueError(f"Triplet index ({i}, {j}) out of range for shape ({rows}, {cols}).")
            entries[i * cols + j] += Fraction(value)
        return cls(rows, cols, tuple(entries))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "ExactMatrix":
        return cls(rows, cols, (Fraction(0),) * (rows * cols))

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        return cls.from_triplets(n, n, ((i, i, 1) for i in range(n)))

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, index: tuple[int, int]) -> Fraction:
        i, j = index
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self.entries[i * self.cols : (i + 1) * self.cols]

    def to_rows(self) -> list[list[Fraction]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def triplets(self) -> list[tuple[int, int, Fraction]]:
        """Sparse form: the nonzero entries as `(row, col, value)`."""
        return [(k // self.cols, k % self.cols, x) for k, x in enumerate(self.entries) if x != 0]

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix(
            self.cols,
            self.rows,
            tuple(self.entries[i * self.cols + j] for j in range(self.cols) for i in range(self.rows)),
        )

    def columns(self, selection: Sequence[int]) -> "ExactMatrix":
        """The submatrix of the given columns."""
        return ExactMatrix.from_rows([[self[i, j] for j in selection] for i in range(self.rows)], len(selection))

    def matvec(self, vector: Sequence[Fraction | int]) -> tuple[Fraction, ...]:
        if len(vector) != self.cols:
            raise ValueError(f"Vector of length {len(vector)} for a matrix with {self.cols} columns.")
        return tuple(
            sum((a * Fraction(b) for a, b in zip(self.row(i), vector) if a), Fraction(0)) for i in range(self.rows)
        )


def _integer_rows(M: ExactMatrix) -> np.ndarray:
    """Scale every row by the lcm of its denominators. Row scaling changes neither rank nor reduced form."""
    A = np.empty((M.rows, M.cols), dtype=object)
    for i in range(M.rows):
        row = M.row(i)
        scale = lcm(*(x.denominator for x in row)) if row else 1
        A[i, :] = [x.numerator * (scale // x.denominator) for x in row]
    return A


def _make_primitive(A: np.ndarray, rows: np.ndarray):
    """Divide each of the given rows by the gcd of its entries."""
    divisors = np.array([gcd(*A[i].tolist()) or 1 for i in rows], dtype=object)
    A[rows] = A[rows] // divisors[:, np.newaxis]


def _eliminate(A: np.ndarray, target: np.ndarray, pivot_row: int, pivot_col: int):
    """Fraction-free update `row <- p * row - a * pivot_row` on the target rows."""
    pivot = A[pivot_row, pivot_col]
    factors = A[target, pivot_col][:, np.newaxis]
    A[target] = pivot * A[target] - factors * A[pivot_row]
    _make_primitive(A, target)


def _forward(A: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Fraction-free forward elimination. Returns the nonzero echelon rows and their pivot columns.

    The pivot of each column is the first row, in row order, with a nonzero entry in that column.
    """
    A = A.copy()
    nrows, ncols = A.shape
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        candidates = np.flatnonzero(A[r:, c] != 0)
        if candidates.size == 0:
            continue
        p = r + int(candidates[0])
        if p != r:
            A[[r, p]] = A[[p, r]]
        below = r + 1 + np.flatnonzero(A[r + 1 :, c] != 0)
        if below.size:
            _eliminate(A, below, r, c)
        pivots.append(c)
        r += 1
    return A[:r], pivots


def _backward(E: np.ndarray, pivots: Sequence[int]) -> np.ndarray:
    """Clear the entries above each pivot of an integer echelon form."""
    E = E.copy()
    for i in reversed(range(len(pivots))):
        above = np.flatnonzero(E[:i, pivots[i]] != 0)
        if above.size:
            _eliminate(E, above, i, pivots[i])
    return E


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for `n < 3.3 * 10^24`."""
    if n < 2:
        return False
    for q in _WITNESSES:
        if n % q == 0:
            return n == q
    s, t = 0, n - 1
    while t % 2 == 0:
        s, t = s + 1, t // 2
    for a in _WITNESSES:
        x = pow(a, t, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def random_prime(bits: int = DEFAULT_PRIME_BITS, rng: random.Random | None = None) -> int:
    """A random prime in `[2^(bits-1), 2^bits)`.

    """
    if not 2 <= bits <= MAX_PRIME_BITS:
        raise ValueError(f"Prime size must be between 2 and {MAX_PRIME_BITS} bits, got {bits}.")
    rng = rng or random.Random()
    while True:
        candidate = rng.randrange(1 << (bits - 1), 1 << bits) | 1
        if is_prime(candidate):
            return candidate


def rank_mod_p(M: ExactMatrix, p: int) -> int:
    """Rank of `M` over the field with `p` elements, or -1 when `p` divides a cleared denominator.

    Never exceeds the rank over the rationals. Primes below 2^31 run on int64 arrays, larger ones on object
    arrays of Python integers.
    """
    if not 2 <= p < 1 << MAX_PRIME_BITS or not is_prime(p):
        raise ValueError(f"Modulus must be a prime below 2^{MAX_PRIME_BITS}, got {p}.")
    if any(x.denominator % p == 0 for x in M.entries):
        return -1

    A = np.array(
        [[(x.numerator * pow(x.denominator, -1, p)) % p for x in M.row(i)] for i in range(M.rows)],
        dtype=np.int64 if p < _INT64_PRIME_BOUND else object,
    ).reshape(M.rows, M.cols)
    nrows, ncols = A.shape
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        candidates = np.flatnonzero(A[r:, c])
        if candidates.size == 0:
            continue
        k = r + int(candidates[0])
        if k != r:
            A[[r, k]] = A[[k, r]]
        A[r] = (A[r] * pow(int(A[r, c]), -1, p)) % p
        below = r + 1 + np.flatnonzero(A[r + 1 :, c])
        if below.size:
            A[below] = (A[below] - A[below, c][:, np.newaxis] * A[r]) % p
        r += 1
    return r


def _resolve_modulus(modulus: int | str | None) -> int | None:
    if modulus is None:
        return None
    if modulus == "random":
        return random_prime()
    return int(modulus)


def rank(M: ExactMatrix, modulus: int | str | None = None) -> int:
    """Rank of `M` over the rationals.

    Args:
        M: The matrix.
        modulus: A prime below 2^62, `"random"` for a random 62-bit prime, or `None`. When given, the rank
            modulo the prime is computed first; if it is already maximal it is the rational rank too, otherwise
            the exact computation runs and decides.
    Returns:
        rank: The exact rank.
    """
    p = _resolve_modulus(modulus)
    if p is not None:
        predicted = rank_mod_p(M, p)
        if predicted == min(M.rows, M.cols):
            logger.debug(f"Rank {predicted} of {M.rows}x{M.cols} matrix certified modulo {p}.")
            return predicted

    E, pivots = _forward(_integer_rows(M))
    if p is not None and predicted != len(pivots):
        logger.debug(f"Prime {p} predicted rank {predicted}, exact rank is {len(pivots)}.")
    return len(pivots)


def row_reduce(M: ExactMatrix) -> tuple[ExactMatrix, list[int]]:
    """Reduced row echelon form of `M` over the rationals.

    Returns:
        R: The reduced row echelon form, same shape as `M`, zero rows last.
        pivots: The strictly increasing pivot columns.
    """
    E, pivots = _forward(_integer_rows(M))
    E = _backward(E, pivots)

    entries: list[Fraction] = []
    for i, c in enumerate(pivots):
        lead = E[i, c]
        entries.extend(Fraction(x, lead) for x in E[i].tolist())
    entries.extend([Fraction(0)] * ((M.rows - len(pivots)) * M.cols))
    logger.debug(f"Reduced {M.rows}x{M.cols} matrix, rank {len(pivots)}.")
    return ExactMatrix(M.rows, M.cols, tuple(entries)), pivots


def nullspace_basis(M: ExactMatrix) -> list[tuple[Fraction, ...]]:
    """Basis of the right kernel of `M`, one vector per non-pivot column.

    The vector of free column `f` has entry 1 at `f`, 0 at the other free columns and the negated reduced
    entries at the pivot columns.
    """
    R, pivots = row_reduce(M)
    pivot_set = set(pivots)
    basis = []
    for f in range(M.cols):
        if f in pivot_set:
            continue
        vector = [Fraction(0)] * M.cols
        vector[f] = Fraction(1)
        for i, c in enumerate(pivots):
            vector[c] = -R[i, f]
        basis.append(tuple(vector))
    return basis
