"""Utilities module."""

from fractions import Fraction
from typing import Sequence

import numpy as np

from .wpoly import Exponent, Polynomial, VarSystem


def get_block_count(count: int, block_size: int = 8) -> int:
    """Gets the number of blocks that `count` consecutive items are split into."""

    if block_size < 1:
        raise ValueError(f"Block size must be positive, got {block_size}.")
    return int(np.ceil(count / block_size))


def get_block(i: int, count: int, block_size: int = 8) -> range:
    """Gets the item indices of the ith block."""

    block_count = get_block_count(count, block_size)
    if not 0 <= i < block_count:
        raise IndexError(f"Index {i} is out of bounds for {block_count} blocks.")
    return range(i * block_size, min((i + 1) * block_size, count))


def format_rational(x: Fraction | int) -> int | str:
    """Exact JSON value: integers as integers, other rationals as `"p/q"` strings."""

    x = Fraction(x)
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def format_monomial(vars: VarSystem, exponent: Exponent) -> str:
    """Monomial text in the input grammar, `"1"` for the constant monomial."""

    return str(Polynomial.monomial(vars, exponent))


def format_table(headers: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    """Left-aligned plain text table."""

    cells = [[str(h) for h in headers]] + [[str(c) for c in row] for row in rows]
    widths = [max(len(row[k]) for row in cells) for k in range(len(headers))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)
