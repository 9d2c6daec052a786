"""Sectors, Hom spaces and the Hochschild-Serre multiplication for graded matrix factorizations.

For a quasi-homogeneous `w` of degree `d` with an isolated singularity, the natural transformations
`Hom(Delta, Delta(m)[t])` of the category of graded matrix factorizations split over the sectors
`g = gamma^j` of `mu_d` (`gamma = exp(2 pi i / d)`). The sector `j` contributes the degree

    D = m - k_g + d * (t - rk W_g) / 2

piece of the Jacobian ring of `w` restricted to the `g`-fixed coordinates, provided `t - rk W_g` is even.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import ceil, floor, gcd
from typing import Literal, Sequence

from . import linalg
from .errors import IndeterminateComposition, NonIsolatedSingularity
from .jacobian import GradedPiece, JacobianRing, build_jacobian, graded_piece, milnor_number, multiply_classes
from .linalg import ExactMatrix
from .wpoly import Polynomial, VarSystem, poly_mul, restrict

logger = logging.getLogger(__name__)

Kind = Literal["cohomology", "homology"]
GammaForm = Literal["hochschild", "serre"]

# Composition rules. R1: untwisted times untwisted, R2: target summand vanishes, R3: a factor vanishes.
RULE_UNTWISTED = "R1"
RULE_ZERO_TARGET = "R2"
RULE_ZERO_FACTOR = "R3"
RULE_RESTRICTION = "restriction"


@dataclass(frozen=True)
class SectorData:
    """The sector `g = gamma^j` of `mu_d`.

    Attributes:
        j: Exponent of `gamma`.
        fixed: Indices of the coordinates fixed by `g`, those with `j * a_i = 0 mod d`.
        rk_w: Number of coordinates moved by `g`, the rank of the conormal sheaf `W_g`.
        k_g: Character of `det W_g`, minus the sum of the moved weights.
        omega_g: `w` restricted to the fixed locus, in the full variable system.
        jac_g: Jacobian ring of `omega_g` on the fixed coordinates.
    """

    j: int
    fixed: tuple[int, ...]
    rk_w: int
    k_g: int
    omega_g: Polynomial
    jac_g: JacobianRing = field(repr=False, compare=False)

    def degree(self, d: int, m: int, t: int) -> int | None:
        """Summand degree in `Hom(Delta, Delta(m)[t])`, or `None` when `t - rk W_g` is odd."""
        if (t - self.rk_w) % 2:
            return None
        return m - self.k_g + d * (t - self.rk_w) // 2


@dataclass(frozen=True)
class SerreData:
    """The Serre functor `S = - (x) O(twist) [shift]`.

    Since `{d} = [2]`, the power `S^cy_period` is the pure shift `[cy_period * cy_dimension]`.
    """

    twist: int
    shift: int
    d: int

    @property
    def cy_period(self) -> int:
        return self.d // gcd(self.d, -self.twist)

    @property
    def cy_dimension(self) -> Fraction:
        return Fraction(self.shift * self.d + 2 * self.twist, self.d)


@dataclass(frozen=True)
class KuznetsovData:
    """The exceptional collection `O_X, ..., O_X(sum a_j - 1 - d)` whose right orthogonal is `Ku(X)`."""

    fano_index: int
    collection: tuple[str, ...]

    @property
    def calabi_yau(self) -> bool:
        return self.fano_index == 0


@dataclass
class OrbifoldModel:
    """All sectors of one potential, certified to have isolated singularities."""

    vars: VarSystem
    omega: Polynomial
    sectors: tuple[SectorData, ...]
    serre: SerreData
    modulus: int | str | None = None

    @property
    def d(self) -> int:
        return self.vars.d

    @property
    def jacobian(self) -> JacobianRing:
        return self.sectors[0].jac_g


@dataclass(frozen=True)
class Summand:
    sector: int
    degree: int
    piece: GradedPiece

    @property
    def dim(self) -> int:
        return self.piece.dim


@dataclass(frozen=True)
class HomSpace:
    """`Hom(Delta, Delta(m)[t])` as its sector summands, ordered by sector.

    Parity-excluded sectors have no summand. Summands of dimension 0 are kept.
    """

    m: int
    t: int
    summands: tuple[Summand, ...]
    model: OrbifoldModel = field(repr=False, compare=False)

    @property
    def total_dim(self) -> int:
        return sum(s.dim for s in self.summands)

    def summand(self, sector: int) -> Summand | None:
        for s in self.summands:
            if s.sector == sector:
                return s
        return None

    def zero(self) -> "HSElement":
        return HSElement(self, tuple((Fraction(0),) * s.dim for s in self.summands))

    def element(self, vector: Sequence[Fraction | int]) -> "HSElement":
        """The element with flattened coordinates `vector` (summand then basis order)."""
        if len(vector) != self.total_dim:
            raise ValueError(f"Expected {self.total_dim} coordinates, got {len(vector)}.")
        coords, start = [], 0
        for s in self.summands:
            coords.append(tuple(Fraction(x) for x in vector[start : start + s.dim]))
            start += s.dim
        return HSElement(self, tuple(coords))

    def basis(self) -> list["HSElement"]:
        return [self.element([int(k == i) for k in range(self.total_dim)]) for i in range(self.total_dim)]

    def basis_labels(self) -> list[tuple[int, tuple[int, ...]]]:
        """`(sector, monomial)` of every basis element, in flattened order."""
        return [(s.sector, m) for s in self.summands for m in s.piece.basis]


@dataclass(frozen=True)
class HSElement:
    """An element of a Hom space: one coordinate vector per summand of `home`."""

    home: HomSpace
    coords: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if len(self.coords) != len(self.home.summands):
            raise ValueError(f"Expected {len(self.home.summands)} summands, got {len(self.coords)}.")
        for s, c in zip(self.home.summands, self.coords):
            if len(c) != s.dim:
                raise ValueError(f"Sector {s.sector} has dimension {s.dim}, got {len(c)} coordinates.")

    @property
    def is_zero(self) -> bool:
        return not any(x for c in self.coords for x in c)

    def component(self, sector: int) -> tuple[Fraction, ...] | None:
        """Coordinates of the sector summand, or `None` if the sector has no summand."""
        for s, c in zip(self.home.summands, self.coords):
            if s.sector == sector:
                return c
        return None

    def flatten(self) -> tuple[Fraction, ...]:
        return tuple(x for c in self.coords for x in c)

    def representative(self, sector: int) -> Polynomial:
        """Polynomial representative of the sector component, in the sector's variable system."""
        s = self.home.summand(sector)
        if s is None:
            raise ValueError(f"Sector {sector} has no summand in Hom(Delta, Delta({self.home.m})[{self.home.t}]).")
        jac = self.home.model.sectors[sector].jac_g
        return s.piece.polynomial(jac.vars, self.component(sector))

    def __add__(self, other: "HSElement") -> "HSElement":
        if self.home != other.home:
            raise ValueError("Cannot add elements of different Hom spaces.")
        return HSElement(
            self.home, tuple(tuple(x + y for x, y in zip(c1, c2)) for c1, c2 in zip(self.coords, other.coords))
        )

    def __mul__(self, scalar: Fraction | int) -> "HSElement":
        scalar = Fraction(scalar)
        return HSElement(self.home, tuple(tuple(x * scalar for x in c) for c in self.coords))

    __rmul__ = __mul__


@dataclass(frozen=True)
class ResolvedTerm:
    """How one term `f_j o ((gamma^j, 1) . g_right)` of a product landing in sector `target` was evaluated."""

    left: int
    right: int
    target: int
    rule: str


@dataclass
class GammaReport:
    """The map `HH^2 -> Hom(HH_-1, HH_1)` and its kernel.

    Rows of `gamma_matrix` are indexed by `(r, s)`, `r` a basis index of `hh_minus1` and `s` of `hh1`, flattened as
    `r * dim HH_1 + s`; columns by the basis of `hh2` in summand-then-basis order.
    """

    hh2: HomSpace
    hh_minus1: HomSpace
    hh1: HomSpace
    gamma_matrix: ExactMatrix
    rank: int
    kernel_dim: int
    kernel_basis: list[HSElement]
    indeterminate_pairs: list[tuple[ResolvedTerm, int]]
    form: GammaForm = "hochschild"


def sector_data(
    vars: VarSystem,
    omega: Polynomial,
    j: int,
    modulus: int | str | None = None,
    workers: int | None = None,
    pool_type: Literal["process", "thread"] | None = None,
) -> SectorData:
    """Build and certify the sector `gamma^j`. With `workers`, the pieces up to the certification window are
    computed in parallel first.

    Raises:
        NonIsolatedSingularity: If `omega_g` has a non-isolated singularity on the fixed locus.
    """
    d = vars.d
    j = j % d
    fixed = tuple(i for i, a in enumerate(vars.weights) if (j * a) % d == 0)
    moved = [a for i, a in enumerate(vars.weights) if i not in fixed]
    omega_g = restrict(omega, fixed)
    jac_g = build_jacobian(omega_g.project(fixed), modulus=modulus)
    if workers is not None:
        from . import multiprocessing

        top = jac_g.socle_degree + max(jac_g.vars.weights, default=0)
        multiprocessing.parallel_graded_pieces(jac_g, range(top + 1), workers=workers, pool_type=pool_type)
    try:
        mu = milnor_number(jac_g)
    except NonIsolatedSingularity as ex:
        raise NonIsolatedSingularity(ex.degree, ex.dim, sector=j) from None
    logger.info(f"Sector j={j}: fixed {[vars.names[i] for i in fixed]}, Milnor number {mu}.")
    return SectorData(j, fixed, len(moved), -sum(moved), omega_g, jac_g)


def sectors(vars: VarSystem, omega: Polynomial, modulus: int | str | None = None) -> list[SectorData]:
    """The `d` sectors `j = 0, ..., d - 1`, each with its certified Jacobian ring."""
    return list(build_model(vars, omega, modulus).sectors)


def serre_data(vars: VarSystem) -> SerreData:
    """Serre functor `- (x) O(-sum a_j) [n + 1]`."""
    return SerreData(-vars.weight_sum, vars.nvars, vars.d)


def kuznetsov_data(vars: VarSystem) -> KuznetsovData:
    index = vars.weight_sum - vars.d
    if index < 1:
        logger.warning(
            f"Fano index sum(a_j) - d = {index} < 1: the Hom-space formula still applies, "
            "but there is no Kuznetsov component to interpret it."
        )
    collection = tuple("O_X" if i == 0 else f"O_X({i})" for i in range(max(index, 0)))
    return KuznetsovData(index, collection)


@lru_cache(maxsize=32)
def build_model(
    vars: VarSystem,
    omega: Polynomial,
    modulus: int | str | None = None,
    workers: int | None = None,
    pool_type: Literal["process", "thread"] | None = None,
) -> OrbifoldModel:
    """Certify every sector of `omega` and bundle them with the Serre data. Cached per input."""
    if omega.vars != vars:
        raise ValueError("omega does not live in the given variable system.")
    kuznetsov_data(vars)
    all_sectors = tuple(sector_data(vars, omega, j, modulus, workers, pool_type) for j in range(vars.d))
    return OrbifoldModel(vars, omega, all_sectors, serre_data(vars), modulus)


def _hom_space(model: OrbifoldModel, m: int, t: int) -> HomSpace:
    summands = []
    for sector in model.sectors:
        degree = sector.degree(model.d, m, t)
        if degree is not None:
            summands.append(Summand(sector.j, degree, graded_piece(sector.jac_g, degree)))
    return HomSpace(m, t, tuple(summands), model)


def hom_space(vars: VarSystem, omega: Polynomial, m: int, t: int, modulus: int | str | None = None) -> HomSpace:
    """`Hom(Delta, Delta(m)[t])` with one summand per sector of matching parity."""
    return _hom_space(build_model(vars, omega, modulus), m, t)


def _hochschild(model: OrbifoldModel, kind: Kind, k: int) -> HomSpace:
    if kind == "cohomology":
        return _hom_space(model, 0, k)
    if kind == "homology":
        return _hom_space(model, model.serre.twist, model.serre.shift + k)
    raise ValueError(f"Invalid kind '{kind}'. Should be 'cohomology' or 'homology'.")


def hochschild(
    vars: VarSystem, omega: Polynomial, kind: Kind, k: int, modulus: int | str | None = None
) -> HomSpace:
    """`HH^k = Hom(Delta, Delta[k])` or `HH_k = Hom(Delta, S[k])` of the Kuznetsov component."""
    return _hochschild(build_model(vars, omega, modulus), kind, k)


def _serre_piece(model: OrbifoldModel, p: int, q: int) -> HomSpace:
    return _hom_space(model, p * model.serre.twist, p * model.serre.shift + q)


def serre_piece(vars: VarSystem, omega: Polynomial, p: int, q: int, modulus: int | str | None = None) -> HomSpace:
    """The bigraded piece `Hom(Id, S^p[q])` of the Hochschild-Serre algebra."""
    return _serre_piece(build_model(vars, omega, modulus), p, q)


def _restriction_term(
    a: HSElement, b: HSElement, target: Summand, target_sector: SectorData
) -> tuple[Fraction, ...]:
    """Untwisted `f_1` acting on the twisted `g_k` by restriction to the fixed locus of `gamma^k`."""
    f = restrict(a.representative(0), target_sector.fixed).project(target_sector.fixed)
    g = b.representative(target_sector.j)
    return target.piece.coordinates(poly_mul(f, g))


def multiply_with_trail(
    a: HSElement, b: HSElement, assume_restriction_action: bool = False
) -> tuple[HSElement, list[ResolvedTerm]]:
    """`hs_multiply`, also returning how every structurally present term was resolved."""
    model = a.home.model
    if (model.vars, model.omega) != (b.home.model.vars, b.home.model.omega):
        raise ValueError("Elements belong to different models.")
    d = model.d
    target_space = _hom_space(model, a.home.m + b.home.m, a.home.t + b.home.t)

    trail: list[ResolvedTerm] = []
    unresolved: list[tuple[int, int, int]] = []
    result = []
    for target in target_space.summands:
        k = target.sector
        total = [Fraction(0)] * target.dim
        for j in range(d):
            right = (k - j) % d
            f, g = a.component(j), b.component(right)
            if f is None or g is None:
                # No summand on one side: the term does not exist.
                continue

            if j == 0 and k == 0:
                term = multiply_classes(
                    model.jacobian, a.home.summand(0).degree, f, b.home.summand(0).degree, g
                )
                rule = RULE_UNTWISTED
            elif target.dim == 0:
                term, rule = (), RULE_ZERO_TARGET
            elif not any(f) or not any(g):
                term, rule = (), RULE_ZERO_FACTOR
            elif assume_restriction_action and j == 0:
                term = _restriction_term(a, b, target, model.sectors[k])
                rule = RULE_RESTRICTION
            else:
                unresolved.append((j, right, k))
                continue

            trail.append(ResolvedTerm(j, right, k, rule))
            for i, x in enumerate(term):
                total[i] += x
        result.append(tuple(total))

    # Targets without a summand (parity-excluded) receive nothing; record the vanishing terms there too.
    present = {s.sector for s in target_space.summands}
    for k in range(d):
        if k in present:
            continue
        for j in range(d):
            right = (k - j) % d
            if a.component(j) is not None and b.component(right) is not None:
                trail.append(ResolvedTerm(j, right, k, RULE_ZERO_TARGET))

    if unresolved:
        raise IndeterminateComposition(unresolved)
    return HSElement(target_space, tuple(result)), trail


def hs_multiply(a: HSElement, b: HSElement, assume_restriction_action: bool = False) -> HSElement:
    """The product `ab` in `Hom(Delta, Delta(m1 + m2)[t1 + t2])`.

    The sector `k` component is `sum_j f_j o ((gamma^j, 1) . g_(k - j))`. Each term is evaluated by the first
    applicable rule: R1 both factors untwisted and `k = 0` (product in Jac(w)), R2 the target summand has dimension
    0, R3 a factor is zero. With `assume_restriction_action`, an untwisted left factor acts on a twisted summand by
    restriction to its fixed locus; this goes beyond what the composition diagram determines.

    Raises:
        IndeterminateComposition: Listing every term no rule resolves.
    """
    if assume_restriction_action:
        logger.warning("Resolving twisted terms by restriction to fixed loci; this is an assumption.")
    return multiply_with_trail(a, b, assume_restriction_action)[0]


def _gamma_spaces(model: OrbifoldModel, form: GammaForm) -> tuple[HomSpace, HomSpace, HomSpace]:
    if form == "hochschild":
        return (
            _hochschild(model, "cohomology", 2),
            _hochschild(model, "homology", -1),
            _hochschild(model, "homology", 1),
        )
    if form == "serre":
        return _serre_piece(model, 2, -2), _serre_piece(model, 1, -1), _serre_piece(model, 3, -3)
    raise ValueError(f"Invalid form '{form}'. Should be 'hochschild' or 'serre'.")


def gamma_column(
    source: HomSpace, factor: HomSpace, c: int, assume_restriction_action: bool = False
) -> tuple[list[tuple[int, Fraction]], list[ResolvedTerm]]:
    """Nonzero entries `(row, value)` of column `c` of the gamma matrix, with the resolution trail."""
    a = source.basis()[c]
    entries: list[tuple[int, Fraction]] = []
    trail: list[ResolvedTerm] = []
    for r, b in enumerate(factor.basis()):
        product, terms = multiply_with_trail(a, b, assume_restriction_action)
        trail.extend(terms)
        width = product.home.total_dim
        entries.extend((r * width + s, x) for s, x in enumerate(product.flatten()) if x)
    return entries, trail


def gamma(
    vars: VarSystem,
    omega: Polynomial,
    form: GammaForm = "hochschild",
    assume_restriction_action: bool = False,
    modulus: int | str | None = None,
    workers: int | None = None,
    pool_type: Literal["process", "thread"] | None = None,
) -> GammaReport:
    """Assemble `gamma: HH^2 -> Hom(HH_-1, HH_1)` column by column and compute its kernel.

    Args:
        vars: The variable system.
        omega: The potential.
        form: `"hochschild"` multiplies `HH^2 x HH_-1 -> HH_1`; `"serre"` multiplies
            `Hom(Id, S^2[-2]) x Hom(Id, S[-1]) -> Hom(Id, S^3[-3])`. The two agree whenever
            `S^2 = [4]`, as for quartic double solids.
        assume_restriction_action: See `hs_multiply`.
        modulus: Optional prime for modular rank shortcuts.
        workers: Number of parallel workers for the columns. If None, columns are computed in-process.
        pool_type: Pool used with `workers`, see `multiprocessing.parallel_gamma_columns`.
    Returns:
        report: The matrix, its rank, the kernel and the resolution trail.
    """
    model = build_model(vars, omega, modulus)
    source, factor, target = _gamma_spaces(model, form)
    if assume_restriction_action:
        logger.warning("Resolving twisted terms by restriction to fixed loci; this is an assumption.")

    if workers is None:
        columns = [gamma_column(source, factor, c, assume_restriction_action) for c in range(source.total_dim)]
    else:
        from . import multiprocessing

        columns = multiprocessing.parallel_gamma_columns(
            source, factor, assume_restriction_action, workers=workers, pool_type=pool_type
        )

    triplets = []
    trail: Counter[ResolvedTerm] = Counter()
    for c, (entries, terms) in enumerate(columns):
        triplets.extend((row, c, x) for row, x in entries)
        trail.update(terms)

    matrix = ExactMatrix.from_triplets(factor.total_dim * target.total_dim, source.total_dim, triplets)
    rank = linalg.rank(matrix)
    kernel = [source.element(v) for v in linalg.nullspace_basis(matrix)]
    logger.info(f"Gamma matrix {matrix.rows}x{matrix.cols} assembled, rank {rank}, kernel dimension {len(kernel)}.")

    twisted = sorted(
        ((term, count) for term, count in trail.items() if term.left or term.right or term.target),
        key=lambda item: (item[0].left, item[0].right, item[0].target, item[0].rule),
    )
    return GammaReport(source, factor, target, matrix, rank, source.total_dim - rank, kernel, twisted, form)


def periodicity_check(vars: VarSystem, omega: Polynomial, m: int, t: int, modulus: int | str | None = None) -> bool:
    """Whether `Hom(Delta, Delta(m + d)[t])` and `Hom(Delta, Delta(m)[t + 2])` agree sector by sector (`{d} = [2]`)."""
    model = build_model(vars, omega, modulus)
    twisted, shifted = _hom_space(model, m + model.d, t), _hom_space(model, m, t + 2)

    def signature(space: HomSpace) -> list[tuple[int, int, int]]:
        return [(s.sector, s.degree, s.dim) for s in space.summands]

    return signature(twisted) == signature(shifted)


def homology_window(vars: VarSystem, omega: Polynomial, modulus: int | str | None = None) -> tuple[int, int]:
    """Range of `k` outside which every summand of `HH_k` has negative degree or exceeds its socle."""
    model = build_model(vars, omega, modulus)
    d, twist, shift = model.d, model.serre.twist, model.serre.shift
    lows, highs = [], []
    for sector in model.sectors:
        # 0 <= twist - k_g + d (shift + k - rk) / 2 <= socle_g
        base = sector.rk_w - shift
        lows.append(base + ceil(Fraction(2 * (sector.k_g - twist), d)))
        highs.append(base + floor(Fraction(2 * (sector.jac_g.socle_degree + sector.k_g - twist), d)))
    return min(lows), max(highs)


def hochschild_table(
    vars: VarSystem, omega: Polynomial, kmin: int, kmax: int, modulus: int | str | None = None
) -> list[tuple[int, HomSpace, HomSpace]]:
    """`(k, HH^k, HH_k)` for `kmin <= k <= kmax`."""
    model = build_model(vars, omega, modulus)
    return [(k, _hochschild(model, "cohomology", k), _hochschild(model, "homology", k)) for k in range(kmin, kmax + 1)]


def hochschild_euler_characteristic(vars: VarSystem, omega: Polynomial, modulus: int | str | None = None) -> int:
    """`sum_k (-1)^k dim HH_k`."""
    model = build_model(vars, omega, modulus)
    low, high = homology_window(vars, omega, modulus)
    return sum((-1) ** (k % 2) * _hochschild(model, "homology", k).total_dim for k in range(low, high + 1))
