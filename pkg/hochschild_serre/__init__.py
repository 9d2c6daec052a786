__version__ = "0.1.0"

from .jacobian import (
    build_jacobian,
    graded_piece,
    hilbert_function,
    hilbert_oracle,
    milnor_number,
    normal_form,
    pairing_rank,
)
from .linalg import ExactMatrix, nullspace_basis, rank, row_reduce
from .orbifold import (
    gamma,
    hochschild,
    hochschild_euler_characteristic,
    hochschild_table,
    hom_space,
    hs_multiply,
    kuznetsov_data,
    periodicity_check,
    sectors,
    serre_data,
    serre_piece,
)
from .wpoly import Polynomial, VarSystem, parse_poly, poly_mul, render, restrict, weighted_degree
