"""Random smooth members of the family of hypersurfaces of a fixed weighted degree."""

import logging
import random
from fractions import Fraction

from . import orbifold
from .errors import NonIsolatedSingularity, NoSmoothMember
from .jacobian import milnor_number
from .wpoly import Polynomial, VarSystem, monomials_of_degree

logger = logging.getLogger(__name__)


def random_member(
    vars: VarSystem,
    omega: Polynomial,
    rng: random.Random,
    terms: int = 3,
    height: int = 3,
    max_tries: int = 20,
    modulus: int | str | None = None,
) -> Polynomial:
    """Perturb `omega` by `terms` random monomials of degree `d` until every sector is smooth with the same Milnor number.

    Args:
        vars: The variable system.
        omega: The base potential, smooth in every sector.
        rng: Source of randomness.
        terms: Number of monomials added.
        height: Coefficients are drawn from the nonzero integers in `[-height, height]`.
        max_tries: Number of candidates drawn before giving up.
        modulus: Optional prime for modular rank shortcuts.
    Returns:
        member: The perturbed potential.
    Raises:
        NoSmoothMember: If no candidate passes within `max_tries`.
    """
    if height < 1:
        raise ValueError(f"Coefficient height must be positive, got {height}.")

    target = milnor_number(orbifold.build_model(vars, omega, modulus).jacobian)
    monomials = list(monomials_of_degree(vars.weights, vars.d))
    coefficients = [c for c in range(-height, height + 1) if c]

    for attempt in range(max_tries):
        chosen = rng.sample(monomials, min(terms, len(monomials)))
        perturbation = Polynomial.from_terms(vars, [(m, Fraction(rng.choice(coefficients))) for m in chosen])
        candidate = omega + perturbation
        if candidate.is_zero:
            continue
        try:
            mu = milnor_number(orbifold.build_model(vars, candidate, modulus).jacobian)
        except NonIsolatedSingularity as ex:
            logger.debug(f"Candidate {attempt} ({candidate}) rejected: {ex}.")
            continue
        if mu == target:
            logger.info(f"Smooth member found after {attempt + 1} candidates: {candidate}.")
            return candidate
        logger.debug(f"Candidate {attempt} ({candidate}) rejected: Milnor number {mu}, expected {target}.")

    raise NoSmoothMember(f"No member with Milnor number {target} found in {max_tries} candidates.")


def family_kernel_dims(
    vars: VarSystem,
    omega: Polynomial,
    samples: int,
    seed: int = 42,
    terms: int = 3,
    height: int = 3,
    modulus: int | str | None = None,
) -> list[tuple[Polynomial, int, int]]:
    """`(member, Milnor number, kernel dimension of gamma)` for `samples` random smooth members."""
    rng = random.Random(seed)
    results = []
    for _ in range(samples):
        member = random_member(vars, omega, rng, terms=terms, height=height, modulus=modulus)
        report = orbifold.gamma(vars, member, modulus=modulus)
        mu = milnor_number(orbifold.build_model(vars, member, modulus).jacobian)
        results.append((member, mu, report.kernel_dim))
    return results
