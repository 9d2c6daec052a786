"""Command line front end: read a YAML input description, run an analysis and print a table or a JSON report."""

import functools
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

import click
import yaml

from . import __version__, family, jacobian, linalg, orbifold, util
from .errors import (
    HochschildSerreError,
    IndeterminateComposition,
    InputSpecError,
    NonIsolatedSingularity,
    NoSmoothMember,
)
from .linalg import ExactMatrix
from .orbifold import GammaReport, HomSpace
from .wpoly import Polynomial, VarSystem, parse_poly, render, weighted_degree

logger = logging.getLogger(__name__)

REPORT_SCHEMA = "hochschild-serre/report"
REPORT_SCHEMA_VERSION = 1

_INPUT_KEYS = {"vars", "weights", "degree", "omega", "options"}
_OPTION_TYPES: dict[str, tuple[type, ...]] = {
    "modulus": (int, str),
    "assume_restriction_action": (bool,),
    "oracle": (bool,),
    "json": (bool,),
    "workers": (int,),
    "pool_type": (str,),
}
_POOL_TYPES = ("process", "thread")


@dataclass(frozen=True)
class InputSpec:
    """A validated input description."""

    vars: VarSystem
    omega: Polynomial
    options: Mapping[str, Any] = field(default_factory=dict)

    @classmethod
    def from_mapping(cls, data: Any) -> "InputSpec":
        """Validate a mapping with the keys `vars`, `weights`, `degree`, `omega` and optionally `options`.

        Raises:
            InputSpecError: For missing, unknown or mistyped keys, or a degree that does not match `omega`.
        """
        if not isinstance(data, Mapping):
            raise InputSpecError("Input must be a mapping.")
        unknown = sorted(set(data) - _INPUT_KEYS)
        if unknown:
            raise InputSpecError(f"Unknown keys {unknown}.")
        missing = sorted(_INPUT_KEYS - {"options"} - set(data))
        if missing:
            raise InputSpecError(f"Missing keys {missing}.")

        names, weights, degree, text = data["vars"], data["weights"], data["degree"], data["omega"]
        if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
            raise InputSpecError("'vars' must be a list of names.")
        if not isinstance(weights, list) or not all(isinstance(w, int) and not isinstance(w, bool) for w in weights):
            raise InputSpecError("'weights' must be a list of integers.")
        if len(names) != len(weights):
            raise InputSpecError(f"{len(names)} variables but {len(weights)} weights.")
        if not isinstance(degree, int) or isinstance(degree, bool) or degree < 2:
            raise InputSpecError(f"'degree' must be an integer >= 2, got {degree!r}.")
        if not isinstance(text, str):
            raise InputSpecError("'omega' must be a polynomial string.")

        options = data.get("options") or {}
        if not isinstance(options, Mapping):
            raise InputSpecError("'options' must be a mapping.")
        for key, value in options.items():
            if key not in _OPTION_TYPES:
                raise InputSpecError(f"Unknown option '{key}'.")
            if not isinstance(value, _OPTION_TYPES[key]) or (bool not in _OPTION_TYPES[key] and isinstance(value, bool)):
                raise InputSpecError(f"Option '{key}' has invalid value {value!r}.")
            _check_option(key, value)

        vars = VarSystem.create(names, weights, degree)
        omega = parse_poly(text, vars)
        e = weighted_degree(omega)
        if e != degree:
            raise InputSpecError(f"omega has weighted degree {e}, but degree {degree} was declared.")
        return cls(vars, omega, dict(options))

    @classmethod
    def load(cls, path: str) -> "InputSpec":
        with open(path, "r", encoding="utf-8") as f:
            try:
                data = yaml.safe_load(f)
            except yaml.YAMLError as ex:
                raise InputSpecError(f"Invalid YAML in {path}: {ex}") from None
        return cls.from_mapping(data)

    def echo(self) -> dict[str, Any]:
        return {
            "vars": list(self.vars.names),
            "weights": list(self.vars.weights),
            "degree": self.vars.d,
            "omega": render(self.omega),
            "options": dict(sorted(self.options.items())),
        }


def _exit_code(ex: HochschildSerreError) -> int:
    if isinstance(ex, IndeterminateComposition):
        return 4
    if isinstance(ex, (NonIsolatedSingularity, NoSmoothMember)):
        return 3
    return 2


def _parse_modulus(value: int | str | None) -> int | str | None:
    if value is None or value == "random":
        return value
    try:
        p = int(value)
    except ValueError:
        p = 0
    if not 2 <= p < 1 << linalg.MAX_PRIME_BITS or not linalg.is_prime(p):
        raise InputSpecError(f"Modulus must be a prime below 2^{linalg.MAX_PRIME_BITS} or 'random', got {value!r}.")
    return p


def _check_option(name: str, value: Any) -> Any:
    """Range checks shared by file options and flags. Returns the value to use."""
    if value is None:
        return None
    if name == "modulus":
        return _parse_modulus(value)
    if name == "workers" and value < 1:
        raise InputSpecError(f"Option 'workers' must be at least 1, got {value!r}.")
    if name == "pool_type" and value not in _POOL_TYPES:
        raise InputSpecError(f"Option 'pool_type' must be one of {list(_POOL_TYPES)}, got {value!r}.")
    return value


@dataclass
class _Run:
    """Effective settings of one command: file options overridden by flags."""

    spec: InputSpec
    as_json: bool
    modulus: int | str | None
    timing: bool

    def option(self, name: str, flag: Any, default: Any = None) -> Any:
        if flag is not None and flag is not False:
            return _check_option(name, flag)
        return _check_option(name, self.spec.options.get(name, default))


def _command(name: str):
    """Common arguments and error handling of every analysis command."""

    def decorator(fn: Callable[..., dict[str, Any]]):
        @click.argument("file", type=click.Path(exists=True, dir_okay=False))
        @click.option("--json", "as_json", is_flag=True, help="Print a JSON report instead of a table.")
        @click.option("--modulus", type=str, default=None, help="Prime (or 'random') for modular rank shortcuts.")
        @click.option("--timing", is_flag=True, help="Add wall-clock timing to the JSON report.")
        @functools.wraps(fn)
        def wrapper(file: str, as_json: bool, modulus: str | None, timing: bool, **kwargs):
            start = time.perf_counter()
            try:
                spec = InputSpec.load(file)
                run = _Run(spec, False, None, timing)
                run.as_json = bool(run.option("json", as_json, False))
                run.modulus = run.option("modulus", modulus)
                results, text = fn(run, **kwargs)
            except HochschildSerreError as ex:
                click.echo(f"{type(ex).__name__}: {ex}", err=True)
                click.get_current_context().exit(_exit_code(ex))

            if run.as_json:
                report = {
                    "schema": REPORT_SCHEMA,
                    "version": REPORT_SCHEMA_VERSION,
                    "tool_version": __version__,
                    "command": name,
                    "input": spec.echo(),
                    "results": results,
                }
                if timing:
                    report["timing"] = {"wall_ms": int((time.perf_counter() - start) * 1000)}
                click.echo(json.dumps(report, sort_keys=True, indent=2))
            else:
                click.echo(text)
                if timing:
                    click.echo(f"\nwall time: {int((time.perf_counter() - start) * 1000)} ms")

        return cli.command(name)(wrapper)

    return decorator


@click.group()
@click.version_option(__version__, prog_name="hochschild-serre")
@click.option("-v", "--verbose", count=True, help="Log progress to stderr (-v info, -vv debug).")
def cli(verbose: int):
    """Hochschild (co)homology and the Hochschild-Serre multiplication of Kuznetsov components of weighted hypersurfaces."""
    level = logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s", force=True)


def _space_dict(space: HomSpace) -> dict[str, Any]:
    return {
        "m": space.m,
        "t": space.t,
        "total_dim": space.total_dim,
        "summands": [{"sector": s.sector, "degree": s.degree, "dim": s.dim} for s in space.summands],
    }


def _space_text(space: HomSpace) -> str:
    parts = [f"Jac(w_{s.sector})_{s.degree}[{s.dim}]" for s in space.summands]
    return " + ".join(parts) if parts else "0"


def _matrix_dict(matrix: ExactMatrix) -> dict[str, Any]:
    return {
        "rows": matrix.rows,
        "cols": matrix.cols,
        "entries": [[i, j, util.format_rational(x)] for i, j, x in matrix.triplets()],
    }


def _matrix_text(matrix: ExactMatrix) -> str:
    return "\n".join(" ".join(str(x) for x in matrix.row(i)) for i in range(matrix.rows))


@_command("analyze")
@click.option("--no-oracle", is_flag=True, help="Skip the Hilbert series cross-check.")
@click.option("--workers", type=int, default=None, help="Compute graded pieces in parallel.")
@click.option("--pool-type", type=click.Choice(_POOL_TYPES), default=None)
def analyze(run: _Run, no_oracle: bool, workers: int | None, pool_type: str | None):
    """Milnor number, Hilbert function, sector table and Serre data."""
    vars, omega = run.spec.vars, run.spec.omega
    oracle = run.spec.options.get("oracle", True) and not no_oracle
    model = orbifold.build_model(
        vars, omega, run.modulus, workers=run.option("workers", workers), pool_type=run.option("pool_type", pool_type)
    )
    J = model.jacobian
    hilbert = jacobian.hilbert_function(J)
    expected = jacobian.hilbert_oracle(vars) if oracle else None
    serre, kuznetsov = model.serre, orbifold.kuznetsov_data(vars)

    sectors = []
    for s in model.sectors:
        sectors.append(
            {
                "j": s.j,
                "fixed": [vars.names[i] for i in s.fixed],
                "rk_w": s.rk_w,
                "k_g": s.k_g,
                "omega_g": render(s.omega_g),
                "milnor_number": jacobian.milnor_number(s.jac_g),
                "hilbert_function": jacobian.hilbert_function(s.jac_g),
            }
        )

    results = {
        "quasi_homogeneous": True,
        "weighted_degree": weighted_degree(omega),
        "milnor_number": jacobian.milnor_number(J),
        "socle_degree": J.socle_degree,
        "hilbert_function": hilbert,
        "hilbert_oracle": expected,
        "oracle_agrees": None if expected is None else expected == hilbert,
        "sectors": sectors,
        "serre": {
            "twist": serre.twist,
            "shift": serre.shift,
            "cy_dimension": util.format_rational(serre.cy_dimension),
            "cy_period": serre.cy_period,
        },
        "kuznetsov": {
            "fano_index": kuznetsov.fano_index,
            "collection": list(kuznetsov.collection),
            "calabi_yau": kuznetsov.calabi_yau,
        },
    }

    lines = [
        f"omega            {render(omega)}",
        f"weighted degree  {results['weighted_degree']}",
        f"milnor number    {results['milnor_number']}",
        f"socle degree     {J.socle_degree}",
        f"hilbert function {hilbert}",
    ]
    if expected is not None:
        lines.append(f"hilbert oracle   {expected} ({'agrees' if expected == hilbert else 'DISAGREES'})")
    lines.append("")
    lines.append(
        util.format_table(
            ["j", "fixed", "rk W_g", "k_g", "omega_g", "mu", "hilbert function"],
            [
                [s["j"], ",".join(s["fixed"]) or "-", s["rk_w"], s["k_g"], s["omega_g"], s["milnor_number"],
                 s["hilbert_function"]]
                for s in sectors
            ],
        )
    )
    lines.append("")
    lines.append(
        f"Serre functor    O({serre.twist})[{serre.shift}], fractional CY dimension "
        f"{serre.cy_dimension} (S^{serre.cy_period} is a shift)"
    )
    lines.append(f"Ku(X)            <{', '.join(kuznetsov.collection)}>^perp, Fano index {kuznetsov.fano_index}")
    return results, "\n".join(lines)


@_command("hh")
@click.option("--kmin", type=int, default=-1, show_default=True)
@click.option("--kmax", type=int, default=2, show_default=True)
def hh(run: _Run, kmin: int, kmax: int):
    """Dimensions of HH^k and HH_k with their sector decompositions."""
    table = orbifold.hochschild_table(run.spec.vars, run.spec.omega, kmin, kmax, run.modulus)
    results = {
        "table": [
            {"k": k, "cohomology": _space_dict(upper), "homology": _space_dict(lower)} for k, upper, lower in table
        ]
    }
    text = util.format_table(
        ["k", "dim HH^k", "HH^k", "dim HH_k", "HH_k"],
        [[k, upper.total_dim, _space_text(upper), lower.total_dim, _space_text(lower)] for k, upper, lower in table],
    )
    return results, text


@_command("hom")
@click.option("-m", "m", type=int, required=True, help="Twist m of Delta(m)[t].")
@click.option("-t", "t", type=int, required=True, help="Shift t of Delta(m)[t].")
def hom(run: _Run, m: int, t: int):
    """The Hom space Hom(Delta, Delta(m)[t])."""
    space = orbifold.hom_space(run.spec.vars, run.spec.omega, m, t, run.modulus)
    model = space.model
    results = _space_dict(space)
    results["basis"] = [
        {"sector": sector, "monomial": util.format_monomial(model.sectors[sector].jac_g.vars, monomial)}
        for sector, monomial in space.basis_labels()
    ]
    text = f"Hom(Delta, Delta({m})[{t}]) = {_space_text(space)}, total dimension {space.total_dim}"
    return results, text


def _element_dict(report: GammaReport, vector: tuple) -> list[dict[str, Any]]:
    """Nonzero coordinates of a kernel vector, tagged with sector and basis monomial."""
    model = report.hh2.model
    entries = []
    for (sector, monomial), x in zip(report.hh2.basis_labels(), vector):
        if x:
            entries.append(
                {
                    "sector": sector,
                    "monomial": util.format_monomial(model.sectors[sector].jac_g.vars, monomial),
                    "coefficient": util.format_rational(x),
                }
            )
    return entries


@_command("gamma")
@click.option("--assume-restriction-action", is_flag=True, help="Resolve untwisted-on-twisted terms by restriction.")
@click.option("--form", type=click.Choice(["hochschild", "serre"]), default="hochschild", show_default=True)
@click.option("--workers", type=int, default=None, help="Assemble gamma columns in parallel.")
@click.option("--pool-type", type=click.Choice(_POOL_TYPES), default=None)
@click.option("--show-matrix", is_flag=True, help="Include the gamma matrix.")
def gamma(
    run: _Run,
    assume_restriction_action: bool,
    form: str,
    workers: int | None,
    pool_type: str | None,
    show_matrix: bool,
):
    """The map gamma: HH^2 -> Hom(HH_-1, HH_1), its rank and kernel."""
    report = orbifold.gamma(
        run.spec.vars,
        run.spec.omega,
        form=form,
        assume_restriction_action=bool(run.option("assume_restriction_action", assume_restriction_action, False)),
        modulus=run.modulus,
        workers=run.option("workers", workers),
        pool_type=run.option("pool_type", pool_type),
    )
    kernel = [_element_dict(report, b.flatten()) for b in report.kernel_basis]
    audit = [
        {"left": term.left, "right": term.right, "target": term.target, "rule": term.rule, "count": count}
        for term, count in report.indeterminate_pairs
    ]
    results = {
        "form": report.form,
        "hh2": _space_dict(report.hh2),
        "hh_minus1": _space_dict(report.hh_minus1),
        "hh1": _space_dict(report.hh1),
        "rank": report.rank,
        "kernel_dim": report.kernel_dim,
        "kernel_basis": kernel,
        "audit": audit,
    }
    if show_matrix:
        results["matrix"] = _matrix_dict(report.gamma_matrix)

    lines = [
        f"HH^2   = {_space_text(report.hh2)}",
        f"HH_-1  = {_space_text(report.hh_minus1)}",
        f"HH_1   = {_space_text(report.hh1)}",
        f"gamma  {report.gamma_matrix.rows}x{report.gamma_matrix.cols}, rank {report.rank}, "
        f"kernel dimension {report.kernel_dim}",
    ]
    for i, entries in enumerate(kernel):
        terms = " + ".join(f"{e['coefficient']}*[{e['monomial']}]_{e['sector']}" for e in entries)
        lines.append(f"kernel {i}: {terms}")
    if audit:
        lines.append("")
        lines.append(
            util.format_table(
                ["left", "right", "target", "rule", "count"],
                [[a["left"], a["right"], a["target"], a["rule"], a["count"]] for a in audit],
            )
        )
    if show_matrix:
        lines.append("")
        lines.append(_matrix_text(report.gamma_matrix))
    return results, "\n".join(lines)


@_command("pairing")
@click.option("--e1", type=int, required=True)
@click.option("--e2", type=int, required=True)
@click.option("--show-matrix", is_flag=True, help="Include the pairing matrix.")
def pairing(run: _Run, e1: int, e2: int, show_matrix: bool):
    """Rank of the multiplication Jac_e1 -> Hom(Jac_e2, Jac_(e1+e2))."""
    J = orbifold.build_model(run.spec.vars, run.spec.omega, run.modulus).jacobian
    matrix, rank = jacobian.pairing_rank(J, e1, e2, modulus=run.modulus)
    dims = [jacobian.graded_piece(J, e).dim for e in (e1, e2, e1 + e2)]
    results = {"e1": e1, "e2": e2, "dims": dims, "rank": rank}
    if show_matrix:
        results["matrix"] = _matrix_dict(matrix)
    text = f"Jac_{e1}[{dims[0]}] x Jac_{e2}[{dims[1]}] -> Jac_{e1 + e2}[{dims[2]}]: rank {rank}"
    if show_matrix:
        text += "\n" + _matrix_text(matrix)
    return results, text


@_command("family")
@click.option("--samples", type=int, default=3, show_default=True)
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--terms", type=int, default=3, show_default=True, help="Random monomials added per member.")
@click.option("--height", type=int, default=3, show_default=True, help="Coefficient bound.")
def family_(run: _Run, samples: int, seed: int, terms: int, height: int):
    """Kernel dimension of gamma for random smooth members of the family."""
    rows = family.family_kernel_dims(
        run.spec.vars, run.spec.omega, samples, seed=seed, terms=terms, height=height, modulus=run.modulus
    )
    results = {
        "seed": seed,
        "members": [{"omega": render(p), "milnor_number": mu, "kernel_dim": k} for p, mu, k in rows],
    }
    text = util.format_table(["omega", "mu", "kernel dim"], [[render(p), mu, k] for p, mu, k in rows])
    return results, text
