"""Module for parallel gamma-matrix assembly and graded-piece computation using multi-processing."""

import logging
import os
from dataclasses import dataclass
from fractions import Fraction
from multiprocessing import Pool, cpu_count
from multiprocessing.pool import ThreadPool
from typing import Any, Callable, Literal, Sequence

from . import orbifold, util
from .jacobian import GradedPiece, JacobianRing, graded_piece
from .orbifold import HomSpace, ResolvedTerm

logger = logging.getLogger(__name__)

DEFAULT_POOL_TYPE = "thread" if os.name == "nt" else "process"

GammaColumn = tuple[list[tuple[int, Fraction]], list[ResolvedTerm]]


@dataclass(frozen=True)
class _GammaArgs:
    source: HomSpace
    factor: HomSpace
    assume_restriction_action: bool
    block_size: int


@dataclass(frozen=True)
class _PieceArgs:
    jacobian: JacobianRing
    degrees: tuple[int, ...]


def _check_pool(workers: int | None, pool_type: str | None) -> tuple[int, Literal["process", "thread"]]:
    pool_type = DEFAULT_POOL_TYPE if pool_type is None else pool_type
    if pool_type not in ["process", "thread"]:
        raise ValueError("Invalid pool type. Should be 'process' or 'thread'.")
    workers = cpu_count() if workers is None else workers
    if workers < 1:
        raise ValueError(f"Worker count must be positive, got {workers}.")
    return workers, pool_type


def _run_blocks(
    init_args: _GammaArgs | _PieceArgs,
    block_count: int,
    workers: int,
    pool_type: Literal["process", "thread"],
    progress_callback_fn: Callable[[int, int], None] | None,
) -> list[Any]:
    """Run `_do_work` on every block id and return the results ordered by block id."""
    count = 0
    results: dict[int, Any] = {}
    pool_ctor = Pool if pool_type == "process" else ThreadPool
    with pool_ctor(processes=min(workers, max(block_count, 1)), initializer=_init_worker, initargs=(init_args,)) as pool:
        for block_id, res in pool.imap_unordered(
            _do_work,
            range(block_count),
            chunksize=1,
        ):
            count += 1
            logger.info(f"Block {block_id} complete ({count}/{block_count}).")
            results[block_id] = res
            if isinstance(progress_callback_fn, Callable):
                progress_callback_fn(count, block_count)

    return [results[block_id] for block_id in range(block_count)]


def parallel_gamma_columns(
    source: HomSpace,
    factor: HomSpace,
    assume_restriction_action: bool = False,
    workers: int | None = None,
    block_size: int = 4,
    progress_callback_fn: Callable[[int, int], None] | None = None,
    pool_type: Literal["process", "thread"] | None = DEFAULT_POOL_TYPE,
) -> list[GammaColumn]:
    """Compute the columns of the gamma matrix in parallel. Returns the same list as computing them one by one.

    Args:
        source: The space whose basis indexes the columns (`HH^2`).
        factor: The space multiplied from the right (`HH_-1`).
        assume_restriction_action: See `orbifold.hs_multiply`.
        workers: Number of worker processes or threads. If None, one per CPU core is used.
        block_size: Number of consecutive columns per work item.
        progress_callback_fn: A callback function that is called with the current block count and the total block count.
        pool_type: The type of pool to use. Either "process" or "thread". If None, the platform default is used:
            "thread" on Windows and "process" on other platforms.

    Returns:
        columns: `(entries, trail)` for each column, ordered by column index.
    """

    workers, pool_type = _check_pool(workers, pool_type)
    init_args = _GammaArgs(
        source=source,
        factor=factor,
        assume_restriction_action=assume_restriction_action,
        block_size=block_size,
    )

    block_count = util.get_block_count(source.total_dim, block_size)
    logger.info(f"{source.total_dim} gamma columns partitioned into {block_count} blocks.")
    blocks = _run_blocks(init_args, block_count, workers, pool_type, progress_callback_fn)
    return [column for block in blocks for column in block]


def parallel_graded_pieces(
    J: JacobianRing,
    degrees: Sequence[int],
    workers: int | None = None,
    progress_callback_fn: Callable[[int, int], None] | None = None,
    pool_type: Literal["process", "thread"] | None = DEFAULT_POOL_TYPE,
) -> list[GradedPiece]:
    """Compute graded pieces of `J` in parallel, one degree per work item, and store them in its cache.

    Returns:
        pieces: The pieces in the order of `degrees`.
    """

    workers, pool_type = _check_pool(workers, pool_type)
    degrees = tuple(degrees)
    init_args = _PieceArgs(jacobian=J, degrees=degrees)
    pieces = _run_blocks(init_args, len(degrees), workers, pool_type, progress_callback_fn)

    with J._lock:
        # Process workers fill their own copies of the cache.
        return [J.piece_cache.setdefault(e, piece) for e, piece in zip(degrees, pieces)]


_worker_args: _GammaArgs | _PieceArgs | None = None


def _init_worker(init_args: _GammaArgs | _PieceArgs):
    """Initialization function for worker."""

    global _worker_args

    _worker_args = init_args


def _do_work(block_id: int):
    """Worker function."""

    if _worker_args is None:
        raise ValueError("Worker not initialized.")

    if isinstance(_worker_args, _PieceArgs):
        return block_id, graded_piece(_worker_args.jacobian, _worker_args.degrees[block_id])

    columns = util.get_block(block_id, _worker_args.source.total_dim, _worker_args.block_size)
    return block_id, [
        orbifold.gamma_column(_worker_args.source, _worker_args.factor, c, _worker_args.assume_restriction_action)
        for c in columns
    ]
