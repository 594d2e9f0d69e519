"""Batch front-end for dualconv job files.

    dualconv <command> --config job.json [--out report.json] [--csv table.csv]
                       [--seed N] [--degree N] [--tol X] [--verbose]

A job file is a JSON object::

    {
        "dualsemigroup": "primitive:1",
        "product": "tensor",
        "generator": {"table": {"x x": 1}},
        "degree_cap": 4,
        "tolerance": 1e-9,
        "t_grid": [0.25, 0.5, 1, 2],
        "words": [["x", "x"], ["x", "x", "x", "x"]],
        "seed": 0,
        "options": {}
    }

``generator`` is one of ``{"table": {...}}`` (space separated words to
values, complex values as ``[re, im]``), ``{"triple": {...}}`` (W, L, G
data for unitary or free group dual semigroups) or ``{"gns": {"h_dim": 2}}``
(random conditionally positive generator from seeded GNS data). Pass
``-`` as config path to read the job from stdin.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import logging.config
import sys
import time
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from dualconv.algebra import FreeProductElement, LinearFunctional, NCPolynomial, Word
from dualconv.convolution import ExponentialSemigroup, exp_series, trotter_sweep
from dualconv.dualsg import DualSemigroup, antipode_check, check_dualsg_laws, get_dual_semigroup
from dualconv.exceptions import AlgebraMismatch, ComputationError, ConfigError
from dualconv.levy import (
    TimeGrid,
    fock_moment,
    fock_spec_from_gns,
    joint_functional,
    random_refinement,
    refinement_check,
    schoenberg_verify,
    stationarity_residual,
)
from dualconv.positivity import (
    GeneratorTriple,
    check_conditionally_positive,
    check_state,
    functional_from_triple,
    gns_construct,
    random_cocycle_functional,
)
from dualconv.products import ProductKind, check_axioms
from dualconv_config import DEFAULTS, LOGGING_CONFIG

_LOGGER = logging.getLogger(__name__)

COMMANDS = (
    "exp",
    "check-cp",
    "check-state",
    "schoenberg",
    "trotter",
    "axioms",
    "laws",
    "joint",
    "refine",
    "fock",
)
# check commands report positivity, they never fail the process
REPORT_ONLY = ("check-cp", "check-state")

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_COMPUTATION = 3


# ============================================================================
# Job configuration
# ============================================================================


def _complex(value: Any) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ConfigError(f"complex numbers are [re, im] pairs, got {value!r}")
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, (int, float)):
        return complex(value)
    raise ConfigError(f"expected a number or [re, im], got {value!r}")


def _word(value: Any) -> Word:
    if isinstance(value, str):
        return tuple(value.split())
    if isinstance(value, (list, tuple)) and all(isinstance(v, str) for v in value):
        return tuple(value)
    raise ConfigError(f"words are arrays of generator names, got {value!r}")


@dataclass
class JobConfig:
    """Validated job file."""

    dualsemigroup: str = "primitive:1"
    product: ProductKind = ProductKind.TENSOR
    generator: dict[str, Any] = field(default_factory=dict)
    degree_cap: int = DEFAULTS["degree_cap"]
    tolerance: float = DEFAULTS["psd_tolerance"]
    t_grid: list[float] = field(default_factory=lambda: [1.0])
    words: list[Word] = field(default_factory=list)
    seed: int = DEFAULTS["seed"]
    options: dict[str, Any] = field(default_factory=dict)

    _KEYS = (
        "dualsemigroup",
        "product",
        "generator",
        "degree_cap",
        "tolerance",
        "t_grid",
        "words",
        "seed",
        "options",
    )

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> JobConfig:
        if not isinstance(data, Mapping):
            raise ConfigError("a job file must hold a JSON object")
        unknown = sorted(set(data) - set(cls._KEYS))
        if unknown:
            raise ConfigError(f"unknown job keys: {', '.join(unknown)}")
        try:
            config = cls(
                dualsemigroup=str(data.get("dualsemigroup", "primitive:1")),
                product=ProductKind.parse(data.get("product", "tensor")),
                generator=dict(data.get("generator", {})),
                degree_cap=int(data.get("degree_cap", DEFAULTS["degree_cap"])),
                tolerance=float(data.get("tolerance", DEFAULTS["psd_tolerance"])),
                t_grid=[float(t) for t in data.get("t_grid", [1.0])],
                words=[_word(w) for w in data.get("words", [])],
                seed=int(data.get("seed", DEFAULTS["seed"])),
                options=dict(data.get("options", {})),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed job file: {exc}") from exc
        if config.degree_cap < 1:
            raise ConfigError(f"degree_cap must be >= 1, got {config.degree_cap}")
        if config.tolerance <= 0:
            raise ConfigError(f"tolerance must be positive, got {config.tolerance}")
        # fail early on unknown built-ins
        config.dual_semigroup()
        return config

    @classmethod
    def load(
        cls, path: str | Path, overrides: Mapping[str, Any] | None = None
    ) -> JobConfig:
        """Read a job file; non-None ``overrides`` replace its keys before validation."""
        try:
            if str(path) == "-":
                data = json.load(sys.stdin)
            else:
                data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read job file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"job file {path} is not valid JSON: {exc}") from exc
        if overrides and isinstance(data, Mapping):
            data = {**data, **{k: v for k, v in overrides.items() if v is not None}}
        return cls.from_dict(data)

    def to_dict(self) -> dict[str, Any]:
        return {
            "dualsemigroup": self.dualsemigroup,
            "product": self.product.value,
            "generator": self.generator,
            "degree_cap": self.degree_cap,
            "tolerance": self.tolerance,
            "t_grid": self.t_grid,
            "words": [list(w) for w in self.words],
            "seed": self.seed,
            "options": self.options,
        }

    def config_hash(self) -> str:
        body = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(body.encode("utf-8")).hexdigest()

    def dual_semigroup(self) -> DualSemigroup:
        return get_dual_semigroup(self.dualsemigroup)

    def option(self, name: str, default: Any = None) -> Any:
        return self.options.get(name, default)

    def kinds(self) -> list[ProductKind]:
        names = self.option("kinds")
        if names is None:
            return [self.product]
        if names == "all":
            return list(ProductKind)
        return [ProductKind.parse(name) for name in names]

    def polynomial(self, dsg: DualSemigroup, word: Word) -> NCPolynomial:
        return NCPolynomial.word(dsg.algebra, *word)

    def generator_functional(self, dsg: DualSemigroup) -> LinearFunctional:
        """The functional named by ``generator`` on the dual semigroup's algebra."""
        spec = self.generator
        algebra = dsg.algebra
        if "table" in spec:
            table = {_word(key): _complex(value) for key, value in spec["table"].items()}
            for word in table:
                for letter in word:
                    try:
                        algebra.symbol(letter)
                    except AlgebraMismatch as exc:
                        raise ConfigError(str(exc)) from exc
            return LinearFunctional.from_table(
                algebra,
                table,
                default=_complex(spec.get("default", 0)),
                hermitian=bool(spec.get("hermitian", True)),
                label=str(spec.get("label", "table")),
            )
        if "triple" in spec:
            try:
                triple = GeneratorTriple.from_dict(spec["triple"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"malformed generator triple: {exc}") from exc
            if triple.dual_semigroup_name != dsg.name:
                raise ConfigError(
                    f"triple describes {triple.dual_semigroup_name}, job uses {dsg.name}"
                )
            return functional_from_triple(triple, self.degree_cap, self.tolerance)
        if "gns" in spec:
            data = spec["gns"]
            return random_cocycle_functional(
                algebra,
                int(data.get("h_dim", 1)),
                seed=int(data.get("seed", self.seed)),
                label="gns",
            )
        raise ConfigError("generator needs one of 'table', 'triple' or 'gns'")


# ============================================================================
# Reports
# ============================================================================


@dataclass
class Report:
    command: str
    config_hash: str
    seed: int
    results: Any
    passed: bool
    wall_clock: float = 0.0
    table: list[dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "results": self.results,
            "passed": self.passed,
            "wall_clock": self.wall_clock,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def write_csv(self, path: Path) -> None:
        if not self.table:
            _LOGGER.warning("%s produces no table; %s not written", self.command, path)
            return
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.DictWriter(handle, fieldnames=list(self.table[0]))
            writer.writeheader()
            writer.writerows(self.table)


def _pair(value: complex) -> list[float]:
    return [float(value.real), float(value.imag)]


def _joint_words(
    config: JobConfig, dsg: DualSemigroup, n_increments: int
) -> list[FreeProductElement]:
    components = (dsg.algebra,) * n_increments
    words = []
    for legs in config.option("joint_words", []):
        try:
            parsed = [(int(k), _word(leg)) for k, leg in legs]
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"joint words are lists of [component, word]: {exc}") from exc
        words.append(FreeProductElement.word(components, parsed, centered=True))
    return words


def _grid(value: Any, name: str) -> TimeGrid:
    try:
        return TimeGrid(tuple(float(t) for t in value))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad {name} grid: {exc}") from exc


# ============================================================================
# Commands
# ============================================================================

Outcome = tuple[Any, bool, list[dict[str, Any]]]


def _run_exp(config: JobConfig) -> Outcome:
    dsg = config.dual_semigroup()
    psi = config.generator_functional(dsg)
    semigroup = ExponentialSemigroup(config.product, dsg, psi)
    series_order = config.option("series_order")
    rows = []
    for t in config.t_grid:
        for word in config.words:
            b = config.polynomial(dsg, word)
            row: dict[str, Any] = {"t": t, "word": " ".join(word), "value": _pair(semigroup.value(t, b))}
            if series_order is not None:
                row["series"] = _pair(exp_series(config.product, dsg, psi, t, b, int(series_order)))
            rows.append(row)
    table = [
        {"t": r["t"], "word": r["word"], "re": r["value"][0], "im": r["value"][1]} for r in rows
    ]
    return {"kind": config.product.value, "values": rows}, True, table


def _run_check_cp(config: JobConfig) -> Outcome:
    dsg = config.dual_semigroup()
    report = check_conditionally_positive(
        config.generator_functional(dsg), config.degree_cap, config.tolerance
    )
    return report.to_dict(), report.passed, []


def _run_check_state(config: JobConfig) -> Outcome:
    dsg = config.dual_semigroup()
    report = check_state(config.generator_functional(dsg), config.degree_cap, config.tolerance)
    return report.to_dict(), report.passed, []


def _run_schoenberg(config: JobConfig) -> Outcome:
    dsg = config.dual_semigroup()
    psi = config.generator_functional(dsg)
    reports = [
        schoenberg_verify(kind, dsg, psi, config.t_grid, config.degree_cap, config.tolerance)
        for kind in config.kinds()
    ]
    return [r.to_dict() for r in reports], all(r.passed for r in reports), []


def _perturbation(
    config: JobConfig, dsg: DualSemigroup
) -> Callable[[int], LinearFunctional] | None:
    spec = config.option("perturbation")
    if spec is None:
        return None
    table = {_word(key): _complex(value) for key, value in spec.get("table", {}).items()}
    base = LinearFunctional.from_table(dsg.algebra, table, label="R")
    scale = float(spec.get("scale", 1.0))
    power = float(spec.get("power", 2.0))
    if power <= 1:
        raise ConfigError(f"perturbations need power > 1 to stay admissible, got {power}")
    return lambda n: base * (scale / n**power)


def _run_trotter(config: JobConfig) -> Outcome:
    dsg = config.dual_semigroup()
    psi = config.generator_functional(dsg)
    if not config.words:
        raise ConfigError("trotter needs at least one word")
    t = float(config.option("t", config.t_grid[-1]))
    ns = [int(n) for n in config.option("ns", [2, 4, 8, 16])]
    min_order = float(config.option("min_order", 0.95))
    perturbation = _perturbation(config, dsg)
    results, table, passed = [], [], True
    for word in config.words:
        sweep = trotter_sweep(
            config.product, dsg, psi, t, config.polynomial(dsg, word), ns, perturbation
        )
        orders = sweep.orders
        converged = all(order >= min_order for order in orders)
        passed = passed and converged
        results.append({"word": " ".join(word), "t": t, "converged": converged, **sweep.to_dict()})
        table.extend(
            {"word": " ".join(word), "n": row.n, "error": row.error} for row in sweep.rows
        )
    return results, passed, table


def _run_axioms(config: JobConfig) -> Outcome:
    kinds = config.kinds() if "kinds" in config.options else list(ProductKind)
    reports = [
        check_axioms(
            kind,
            trials=int(config.option("trials", DEFAULTS["axiom_trials"])),
            degree_cap=config.degree_cap,
            seed=config.seed,
            tol=float(config.option("axiom_tolerance", DEFAULTS["axiom_tolerance"])),
        )
        for kind in kinds
    ]
    return [r.to_dict() for r in reports], all(r.conforms for r in reports), []


def _run_laws(config: JobConfig) -> Outcome:
    dsg = config.dual_semigroup()
    tol = float(config.option("law_tolerance", DEFAULTS["law_tolerance"]))
    reports = {"laws": check_dualsg_laws(dsg, config.degree_cap, tol)}
    if dsg.has_antipode:
        reports["antipode"] = antipode_check(dsg, config.degree_cap, tol)
    return (
        {name: report.to_dict() for name, report in reports.items()},
        all(report.passed for report in reports.values()),
        [],
    )


def _run_joint(config: JobConfig) -> Outcome:
    dsg = config.dual_semigroup()
    psi = config.generator_functional(dsg)
    sigma = _grid(config.option("grid", config.t_grid), "joint")
    semigroup = ExponentialSemigroup(config.product, dsg, psi)
    shift = config.option("shift")
    rows, passed = [], True
    for w in _joint_words(config, dsg, len(sigma)):
        row: dict[str, Any] = {
            "word": repr(w),
            "value": _pair(joint_functional(config.product, dsg, psi, sigma, w, semigroup)),
        }
        if shift is not None:
            residual = stationarity_residual(
                config.product, dsg, psi, sigma, float(shift), w, semigroup
            )
            row["stationarity_residual"] = residual
            passed = passed and residual <= config.tolerance
        rows.append(row)
    return {"grid": list(sigma.times), "values": rows}, passed, []


def _run_refine(config: JobConfig) -> Outcome:
    dsg = config.dual_semigroup()
    psi = config.generator_functional(dsg)
    tol = float(config.option("semigroup_tolerance", DEFAULTS["semigroup_tolerance"]))
    rows, passed = [], True
    for kind in config.kinds():
        semigroup = ExponentialSemigroup(kind, dsg, psi)
        cases = []
        count = int(config.option("random_triples", 0))
        if count:
            rng = np.random.default_rng(config.seed)
            cases = [random_refinement(rng, dsg) for _ in range(count)]
        else:
            sigma = _grid(config.option("sigma"), "sigma")
            tau = _grid(config.option("tau"), "tau")
            upsilon = config.option("upsilon")
            upsilon_grid = _grid(upsilon, "upsilon") if upsilon is not None else None
            cases = [
                (sigma, tau, upsilon_grid, w) for w in _joint_words(config, dsg, len(sigma))
            ]
        for sigma, tau, upsilon, w in cases:
            result = refinement_check(kind, dsg, psi, sigma, tau, w, upsilon, tol, semigroup)
            passed = passed and result.passed
            rows.append(
                {
                    "kind": kind.value,
                    "sigma": list(sigma.times),
                    "tau": list(tau.times),
                    "upsilon": list(upsilon.times) if upsilon is not None else None,
                    **result.to_dict(),
                }
            )
    return rows, passed, []


def _run_fock(config: JobConfig) -> Outcome:
    dsg = config.dual_semigroup()
    psi = config.generator_functional(dsg)
    flavors = {ProductKind.TENSOR: "bose", ProductKind.FREE: "full"}
    flavor = config.option("flavor", flavors.get(config.product))
    if flavor is None:
        raise ConfigError(f"no Fock realization for {config.product.value} independence")
    longest = max((len(w) for w in config.words), default=1)
    truncation = int(config.option("truncation", longest))
    gns = gns_construct(psi, config.degree_cap, config.tolerance)
    spec = fock_spec_from_gns(gns, flavor, truncation)
    semigroup = ExponentialSemigroup(config.product, dsg, psi)
    rows, passed = [], True
    for t in config.t_grid:
        for word in config.words:
            fock = fock_moment(spec, word, t)
            # vacuum moments are unital values
            exact = semigroup.word_value(t, word) + dsg.algebra.counit(word)
            residual = abs(fock - exact)
            passed = passed and residual <= config.tolerance
            rows.append(
                {
                    "t": t,
                    "word": " ".join(word),
                    "fock": _pair(fock),
                    "exponential": _pair(exact),
                    "residual": residual,
                }
            )
    results = {"flavor": flavor, "gns": gns.to_dict(), "truncation": truncation, "rows": rows}
    table = [{k: r[k] for k in ("t", "word", "residual")} for r in rows]
    return results, passed, table


RUNNERS: dict[str, Callable[[JobConfig], Outcome]] = {
    "exp": _run_exp,
    "check-cp": _run_check_cp,
    "check-state": _run_check_state,
    "schoenberg": _run_schoenberg,
    "trotter": _run_trotter,
    "axioms": _run_axioms,
    "laws": _run_laws,
    "joint": _run_joint,
    "refine": _run_refine,
    "fock": _run_fock,
}


def run(command: str, config: JobConfig) -> tuple[Report, int]:
    """Run one command; the exit code is 0 on pass, 1 on a failed verification."""
    if command not in RUNNERS:
        raise ConfigError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
    started = time.perf_counter()
    results, passed, table = RUNNERS[command](config)
    report = Report(
        command,
        config.config_hash(),
        config.seed,
        results,
        passed,
        round(time.perf_counter() - started, 6),
        table,
    )
    code = EXIT_PASS if passed or command in REPORT_ONLY else EXIT_FAIL
    return report, code


# ============================================================================
# Entry point
# ============================================================================


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="dualconv",
        description="Convolution exponentials and Lévy processes on dual semigroups.",
    )
    parser.add_argument("command", choices=COMMANDS, help="What to compute or verify")
    parser.add_argument("--config", required=True, help="Job file (JSON), '-' for stdin")
    parser.add_argument("--out", type=Path, help="Write the report here instead of stdout")
    parser.add_argument("--csv", type=Path, help="Also write the moment/error table as CSV")
    parser.add_argument("--seed", type=int, help="Override the job's RNG seed")
    parser.add_argument("--degree", type=int, help="Override the job's degree cap")
    parser.add_argument("--tol", type=float, help="Override the job's tolerance")
    parser.add_argument("--verbose", action="store_true", help="Debug logging on stderr")
    return parser.parse_args(argv)


def main(argv: Sequence[str] | None = None) -> int:
    args = parse_args(argv)
    logging.config.dictConfig(LOGGING_CONFIG)
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    try:
        config = JobConfig.load(
            args.config,
            {"seed": args.seed, "degree_cap": args.degree, "tolerance": args.tol},
        )
        report, code = run(args.command, config)
    except (ConfigError, ValueError) as exc:
        # ValueError: plain-value preconditions (grids, counts) taken from the job
        _LOGGER.error("Configuration error: %s", exc)
        return EXIT_CONFIG
    except ComputationError as exc:
        _LOGGER.error("Computation failed: %s", exc)
        return EXIT_COMPUTATION

    if args.out:
        args.out.write_text(report.to_json() + "\n", encoding="utf-8")
    else:
        print(report.to_json())
    if args.csv:
        report.write_csv(args.csv)
    _LOGGER.info("%s finished in %.3fs, passed=%s", args.command, report.wall_clock, report.passed)
    return code


if __name__ == "__main__":
    sys.exit(main())
