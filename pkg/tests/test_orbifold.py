import random
import unittest
from fractions import Fraction

import pytest

from hochschild_serre import orbifold
from hochschild_serre.errors import IndeterminateComposition, NonIsolatedSingularity
from hochschild_serre.jacobian import graded_piece, normal_form
from hochschild_serre.linalg import rank
from hochschild_serre.orbifold import (
    ResolvedTerm,
    gamma,
    hochschild,
    hochschild_euler_characteristic,
    hochschild_table,
    hom_space,
    hs_multiply,
    kuznetsov_data,
    multiply_with_trail,
    periodicity_check,
    sectors,
    serre_data,
    serre_piece,
)
from hochschild_serre.wpoly import VarSystem, parse_poly, poly_mul

QDS = VarSystem.create(["x1", "x2", "x3", "x4", "x5"], [1, 1, 1, 1, 2], 4)
CUBIC = VarSystem.create(["x1", "x2", "x3", "x4", "x5"], [1, 1, 1, 1, 1], 3)
OMEGA = parse_poly("x1^4 + x2^4 + x3^4 + x4^4 + x5^2", QDS)
CUBIC_OMEGA = parse_poly("x1^3 + x2^3 + x3^3 + x4^3 + x5^3", CUBIC)
M31 = 2147483647

PERTURBED = [
    "x1^4 + x2^4 + x3^4 + x4^4 + x1*x2*x3*x4 + x5^2",
    "x1^4 + x1^3*x2 + x2^4 + x3^4 + x4^4 + x5^2",
    "x1^4 + x1^2*x2^2 + x2^4 + x3^4 + x3^2*x4^2 + x4^4 + x5^2",
    "x1^4 + x2^4 + x3^4 + x4^4 + x1^2*x5 + x5^2",
]


def signature(space):
    return [(s.sector, s.degree, s.dim) for s in space.summands]


def basis_element(space, sector, monomial):
    """The basis element of `space` whose label is `(sector, monomial)`."""
    return space.basis()[space.basis_labels().index((sector, monomial))]


def twisted_unit(space):
    """The unit of the sector j=2 summand, which has dimension 1 in the spaces used here."""
    return basis_element(space, 2, (0,))


class TestSectors(unittest.TestCase):
    def test_quartic_double_solid(self):
        table = [(s.j, s.rk_w, s.k_g) for s in sectors(QDS, OMEGA)]
        self.assertEqual(table, [(0, 0, 0), (1, 5, -6), (2, 4, -4), (3, 5, -6)])

    def test_fixed_loci(self):
        all_sectors = sectors(QDS, OMEGA)
        self.assertEqual(all_sectors[0].fixed, (0, 1, 2, 3, 4))
        self.assertEqual(all_sectors[1].fixed, ())
        self.assertEqual(all_sectors[2].fixed, (4,))
        self.assertEqual(all_sectors[2].omega_g, parse_poly("x5^2", QDS))
        self.assertEqual(all_sectors[2].jac_g.vars, QDS.subsystem([4]))

    def test_cubic(self):
        table = [(s.j, s.rk_w, s.k_g) for s in sectors(CUBIC, CUBIC_OMEGA)]
        self.assertEqual(table, [(0, 0, 0), (1, 5, -5), (2, 5, -5)])

    def test_conic(self):
        conic = VarSystem.create(["x", "y"], [1, 1], 2)
        s = sectors(conic, parse_poly("x^2 + y^2", conic))[1]
        self.assertEqual((s.rk_w, s.k_g, s.fixed), (2, -2, ()))

    def test_counts(self):
        for vars, omega in [(QDS, OMEGA), (CUBIC, CUBIC_OMEGA)]:
            all_sectors = sectors(vars, omega)
            self.assertEqual(len(all_sectors), vars.d)
            self.assertEqual(sum(s.rk_w + len(s.fixed) for s in all_sectors), vars.d * vars.nvars)

    def test_non_isolated(self):
        with self.assertRaises(NonIsolatedSingularity) as cm:
            sectors(QDS, parse_poly("x1^4 + x2^4 + x5^2", QDS))
        self.assertEqual(cm.exception.sector, 0)


class TestSerre(unittest.TestCase):
    def test_quartic_double_solid(self):
        serre = serre_data(QDS)
        self.assertEqual((serre.twist, serre.shift), (-6, 5))
        self.assertEqual(serre.cy_dimension, 2)
        self.assertEqual(serre.cy_period, 2)

    def test_cubic(self):
        serre = serre_data(CUBIC)
        self.assertEqual((serre.twist, serre.shift), (-5, 5))
        self.assertEqual(serre.cy_dimension, Fraction(5, 3))
        self.assertEqual(serre.cy_period, 3)

    def test_kuznetsov(self):
        data = kuznetsov_data(QDS)
        self.assertEqual(data.fano_index, 2)
        self.assertEqual(data.collection, ("O_X", "O_X(1)"))
        self.assertFalse(data.calabi_yau)

    def test_calabi_yau_warns(self):
        quintic = VarSystem.create(["x1", "x2", "x3", "x4", "x5"], [1, 1, 1, 1, 1], 5)
        with self.assertLogs("hochschild_serre.orbifold", level="WARNING"):
            data = kuznetsov_data(quintic)
        self.assertTrue(data.calabi_yau)
        self.assertEqual(data.collection, ())


class TestHomSpace(unittest.TestCase):
    def test_hh2(self):
        space = hom_space(QDS, OMEGA, 0, 2)
        self.assertEqual(signature(space), [(0, 4, 19), (2, 0, 1)])
        self.assertEqual(space.total_dim, 20)

    def test_hh_minus1(self):
        space = hom_space(QDS, OMEGA, -6, 4)
        self.assertEqual(signature(space), [(0, 2, 10), (2, -2, 0)])

    def test_point_sectors(self):
        space = hom_space(QDS, OMEGA, -6, 5)
        self.assertEqual(signature(space), [(1, 0, 1), (3, 0, 1)])

    def test_vanishing(self):
        space = hom_space(QDS, OMEGA, 0, 1)
        self.assertEqual(signature(space), [(1, -2, 0), (3, -2, 0)])
        self.assertEqual(space.total_dim, 0)

    def test_parity(self):
        for t in range(-3, 6):
            space = hom_space(QDS, OMEGA, 0, t)
            for s in sectors(QDS, OMEGA):
                self.assertEqual(space.summand(s.j) is not None, (t - s.rk_w) % 2 == 0)

    def test_element_shape(self):
        space = hom_space(QDS, OMEGA, 0, 2)
        with self.assertRaises(ValueError):
            space.element([1, 2, 3])
        self.assertTrue(space.zero().is_zero)
        self.assertEqual(len(space.basis()), 20)


class TestHochschild(unittest.TestCase):
    def test_quartic_double_solid(self):
        self.assertEqual(hochschild(QDS, OMEGA, "cohomology", 2).total_dim, 20)
        self.assertEqual(hochschild(QDS, OMEGA, "homology", -1).total_dim, 10)
        self.assertEqual(hochschild(QDS, OMEGA, "homology", 1).total_dim, 10)
        self.assertEqual(hochschild(QDS, OMEGA, "homology", 0).total_dim, 2)
        self.assertEqual(hochschild(QDS, OMEGA, "cohomology", 0).total_dim, 1)

    def test_sector_structure(self):
        self.assertEqual(signature(hochschild(QDS, OMEGA, "homology", -1)), [(0, 2, 10), (2, -2, 0)])
        self.assertEqual(signature(hochschild(QDS, OMEGA, "homology", 1)), [(0, 6, 10), (2, 2, 0)])
        self.assertEqual(signature(hochschild(QDS, OMEGA, "cohomology", 0))[0], (0, 0, 1))

    def test_cubic(self):
        self.assertEqual(hochschild(CUBIC, CUBIC_OMEGA, "cohomology", 2).total_dim, 10)
        self.assertEqual(hochschild(CUBIC, CUBIC_OMEGA, "homology", -1).total_dim, 5)
        self.assertEqual(hochschild(CUBIC, CUBIC_OMEGA, "homology", 1).total_dim, 5)
        self.assertEqual(hochschild(CUBIC, CUBIC_OMEGA, "homology", 0).total_dim, 2)

    def test_invalid_kind(self):
        with self.assertRaises(ValueError):
            hochschild(QDS, OMEGA, "cyclic", 0)

    def test_table(self):
        table = hochschild_table(QDS, OMEGA, -1, 2)
        self.assertEqual([k for k, _, _ in table], [-1, 0, 1, 2])
        self.assertEqual([lower.total_dim for _, _, lower in table], [10, 2, 10, 0])
        self.assertEqual([upper.total_dim for _, upper, _ in table], [0, 1, 0, 20])
        self.assertEqual(hochschild_table(QDS, OMEGA, 2, 1), [])

    def test_euler_characteristic(self):
        self.assertEqual(orbifold.homology_window(QDS, OMEGA), (-2, 2))
        self.assertEqual(hochschild_euler_characteristic(QDS, OMEGA), -18)
        self.assertEqual(hochschild_euler_characteristic(CUBIC, CUBIC_OMEGA), -8)

    def test_serre_pieces(self):
        self.assertEqual(signature(serre_piece(QDS, OMEGA, 2, -2)), [(0, 4, 19), (2, 0, 1)])
        self.assertEqual(serre_piece(QDS, OMEGA, 1, -1).total_dim, 10)
        self.assertEqual(signature(serre_piece(QDS, OMEGA, 3, -3))[0], (0, 6, 10))


class TestMultiply(unittest.TestCase):
    def setUp(self):
        self.hh2 = hochschild(QDS, OMEGA, "cohomology", 2)
        self.hh_minus1 = hochschild(QDS, OMEGA, "homology", -1)

    def test_twisted_times_untwisted_vanishes(self):
        a = twisted_unit(self.hh2)
        for b in self.hh_minus1.basis():
            product, trail = multiply_with_trail(a, b)
            self.assertEqual((product.home.m, product.home.t), (-6, 6))
            self.assertTrue(product.is_zero)
            self.assertIn(ResolvedTerm(2, 0, 2, "R2"), trail)

    def test_untwisted_is_multiplication_of_functions(self):
        a = basis_element(self.hh2, 0, (2, 2, 0, 0, 0))
        b = basis_element(self.hh_minus1, 0, (0, 0, 1, 1, 0))
        product = hs_multiply(a, b)
        J = product.home.model.jacobian
        expected = normal_form(J, poly_mul(a.representative(0), b.representative(0)))
        self.assertEqual(product.component(0), expected)
        self.assertFalse(product.is_zero)

    def test_zero_factor(self):
        for a in self.hh2.basis():
            self.assertTrue(hs_multiply(a, self.hh_minus1.zero()).is_zero)

    def test_twisted_times_twisted_is_indeterminate(self):
        a = twisted_unit(self.hh2)
        b = twisted_unit(hom_space(QDS, OMEGA, -4, 4))
        with self.assertRaises(IndeterminateComposition) as cm:
            hs_multiply(a, b)
        self.assertEqual(cm.exception.terms, ((2, 2, 0),))
        self.assertIn("f[j=2] o g[j=2] -> target j=0", str(cm.exception))

    def test_identity_on_twisted_sector_needs_extension(self):
        identity = hochschild(QDS, OMEGA, "cohomology", 0).basis()[0]
        b = twisted_unit(self.hh2)
        with self.assertRaises(IndeterminateComposition) as cm:
            hs_multiply(identity, b)
        self.assertEqual(cm.exception.terms, ((0, 2, 2),))

        with self.assertLogs("hochschild_serre.orbifold", level="WARNING"):
            product = hs_multiply(identity, b, assume_restriction_action=True)
        self.assertEqual(product.flatten(), b.flatten())

    def test_identity_on_untwisted(self):
        identity = hochschild(QDS, OMEGA, "cohomology", 0).basis()[0]
        for b in self.hh_minus1.basis():
            self.assertEqual(hs_multiply(identity, b).flatten(), b.flatten())

    def test_bilinear(self):
        basis2, basis1 = self.hh2.basis(), self.hh_minus1.basis()
        a, a2, b = basis2[3] * 2 + basis2[19], basis2[7] * Fraction(-1, 3), basis1[4] + basis1[1]
        self.assertEqual(
            hs_multiply(a + a2, b).flatten(),
            (hs_multiply(a, b) + hs_multiply(a2, b)).flatten(),
        )

    def test_untwisted_commutative(self):
        hh2_untwisted = [basis_element(self.hh2, 0, m) for m in self.hh2.summand(0).piece.basis[:5]]
        for a in hh2_untwisted:
            for b in hh2_untwisted:
                self.assertEqual(hs_multiply(a, b).component(0), hs_multiply(b, a).component(0))

    def test_associative(self):
        rng = random.Random(11)
        omega = parse_poly(PERTURBED[0], QDS)
        elements = []
        for m in (1, 2, 3):
            space = hom_space(QDS, omega, m, 0)
            self.assertEqual(signature(space)[0][0], 0)
            element = space.zero()
            for b in space.basis():
                element = element + b * Fraction(rng.randint(-5, 5), rng.randint(1, 3))
            elements.append(element)

        a, b, c = elements
        left, right = hs_multiply(hs_multiply(a, b), c), hs_multiply(a, hs_multiply(b, c))
        self.assertEqual((left.home.m, left.home.t), (6, 0))
        self.assertEqual(left.component(0), right.component(0))
        self.assertEqual(left.flatten(), right.flatten())

    def test_different_models(self):
        cubic_hh2 = hochschild(CUBIC, CUBIC_OMEGA, "cohomology", 2)
        with self.assertRaises(ValueError):
            hs_multiply(self.hh2.basis()[0], cubic_hh2.basis()[0])


class TestGamma(unittest.TestCase):
    def test_quartic_double_solid(self):
        report = gamma(QDS, OMEGA)
        self.assertEqual(report.gamma_matrix.shape, (100, 20))
        self.assertEqual(report.rank, 19)
        self.assertEqual(report.kernel_dim, 1)
        self.assertEqual(len(report.kernel_basis), 1)
        self.assertEqual(report.kernel_basis[0].flatten(), (Fraction(0),) * 19 + (Fraction(1),))
        self.assertEqual(report.kernel_basis[0].component(0), (Fraction(0),) * 19)

    def test_untwisted_block_is_injective(self):
        report = gamma(QDS, OMEGA)
        block = report.gamma_matrix.columns(range(19))
        twisted = report.gamma_matrix.columns([19])
        self.assertEqual(rank(block), 19)
        self.assertEqual(rank(twisted), 0)

    def test_kernel_annihilates(self):
        report = gamma(QDS, OMEGA)
        for k in report.kernel_basis:
            for b in report.hh_minus1.basis():
                self.assertTrue(hs_multiply(k, b).is_zero)

    def test_audit_trail(self):
        report = gamma(QDS, OMEGA)
        terms = {term for term, _ in report.indeterminate_pairs}
        self.assertIn(ResolvedTerm(2, 0, 2, "R2"), terms)
        self.assertTrue(all(term.rule in ("R2", "R3") for term in terms))

    def test_cubic(self):
        report = gamma(CUBIC, CUBIC_OMEGA)
        self.assertEqual(report.gamma_matrix.shape, (25, 10))
        self.assertEqual(report.rank, 10)
        self.assertEqual(report.kernel_dim, 0)
        self.assertEqual(report.indeterminate_pairs, [])
        self.assertEqual(
            (report.hh2.total_dim, report.hh_minus1.total_dim, report.hh1.total_dim),
            (10, 5, 5),
        )

    def test_serre_form(self):
        report = gamma(QDS, OMEGA, form="serre")
        self.assertEqual((report.hh2.m, report.hh2.t), (-12, 8))
        self.assertEqual(report.rank, 19)
        self.assertEqual(report.kernel_dim, 1)

    def test_serre_form_cubic(self):
        report = gamma(CUBIC, CUBIC_OMEGA, form="serre")
        self.assertEqual(report.gamma_matrix.shape, (50, 10))
        self.assertEqual(report.kernel_dim, 0)

    def test_invalid_form(self):
        with self.assertRaises(ValueError):
            gamma(QDS, OMEGA, form="cyclic")

    def test_non_isolated(self):
        with self.assertRaises(NonIsolatedSingularity):
            gamma(QDS, parse_poly("x1^4 + x2^4 + x5^2", QDS))

    def test_thread_pool(self):
        serial = gamma(QDS, OMEGA)
        parallel = gamma(QDS, OMEGA, workers=2, pool_type="thread")
        self.assertEqual(serial.gamma_matrix, parallel.gamma_matrix)
        self.assertEqual(serial.indeterminate_pairs, parallel.indeterminate_pairs)


@pytest.mark.parametrize("text", PERTURBED)
def test_perturbed_quartic_double_solids(text):
    omega = parse_poly(text, QDS)
    model = orbifold.build_model(QDS, omega, M31)
    assert sum(graded_piece(model.jacobian, e).dim for e in range(9)) == 81
    report = gamma(QDS, omega, modulus=M31)
    assert report.kernel_dim == 1


@pytest.mark.parametrize("vars, omega", [(QDS, OMEGA), (CUBIC, CUBIC_OMEGA)])
def test_periodicity(vars, omega):
    for m in range(-8, 9):
        for t in range(-4, 9):
            assert periodicity_check(vars, omega, m, t)
