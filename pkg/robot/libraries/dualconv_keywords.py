"""Dualconv Keywords for Robot Framework.

Keywords for convolution exponentials, positivity checks, Levy processes
and batch jobs, aligned with BDD scenario steps.
Uses @keyword decorator to map clean function names to scenario step text.

Mirrors: tests/step_defs/background_steps.py, convolution_steps.py,
positivity_steps.py, levy_steps.py, cli_steps.py
"""

import json
import logging
import tempfile
from pathlib import Path
from typing import Any

from robot.api.deco import keyword, library

from dualconv.algebra import FreeProductElement, LinearFunctional, NCPolynomial
from dualconv.cli import main
from dualconv.convolution import conv_exp, exp_series, star, trotter_exp
from dualconv.dualsg import DualSemigroup, get_dual_semigroup
from dualconv.levy import (
    TimeGrid,
    fock_moment,
    fock_spec_from_gns,
    schoenberg_verify,
    stationarity_residual,
)
from dualconv.positivity import check_state, gns_construct, random_cocycle_functional
from dualconv.products import ProductKind
from dualconv_config import JOBS_DIR

_LOGGER = logging.getLogger(__name__)

_TIMES = [0.25, 0.5, 1.0, 2.0]


def _close(value: Any, expected: float, tol: float) -> bool:
    return abs(complex(value) - float(expected)) <= float(tol)


@library(scope="TEST", doc_format="TEXT")
class DualconvKeywords:
    """Keywords for dualconv scenarios; state lives for one test."""

    def __init__(self) -> None:
        """Initialize DualconvKeywords."""
        self._dsg: DualSemigroup | None = None
        self._kind: ProductKind | None = None
        self._generator: LinearFunctional | None = None
        self._report: dict[str, Any] | None = None

    @property
    def dual_semigroup(self) -> DualSemigroup:
        if self._dsg is None:
            raise AssertionError("No dual semigroup selected")
        return self._dsg

    @property
    def kind(self) -> ProductKind:
        if self._kind is None:
            raise AssertionError("No product selected")
        return self._kind

    @property
    def generator(self) -> LinearFunctional:
        if self._generator is None:
            raise AssertionError("No generator selected")
        return self._generator

    def _poly(self, word: str) -> NCPolynomial:
        return NCPolynomial.word(self.dual_semigroup.algebra, *word.split())

    # =========================================================================
    # Background Keywords
    # =========================================================================

    @keyword("The dual semigroup")
    def select_dual_semigroup(self, name: str) -> DualSemigroup:
        """Pick a built-in dual semigroup by name, e.g. unitary:2.

        Maps to scenario step:
        - "Given the primitive dual semigroup on one generator"
        """
        self._dsg = get_dual_semigroup(name)
        print(f"✓ Dual semigroup: {self._dsg.name}")
        return self._dsg

    @keyword("The primitive dual semigroup on one generator")
    def primitive_dual_semigroup(self) -> DualSemigroup:
        return self.select_dual_semigroup("primitive:1")

    @keyword("The Gaussian generator")
    def gaussian_generator(self) -> LinearFunctional:
        """psi(x^n) = 1 if n == 2 else 0.

        Maps to scenario step:
        - "And the Gaussian generator"
        """
        self._generator = LinearFunctional.from_table(
            self.dual_semigroup.algebra, {("x", "x"): 1.0}, hermitian=True, label="gaussian"
        )
        return self._generator

    @keyword("A random GNS generator")
    def random_gns_generator(self, h_dim: int, seed: int) -> LinearFunctional:
        """Conditionally positive generator from seeded (rho, eta, psi) data.

        Arguments:
            h_dim: dimension of the cocycle's Hilbert space
            seed: RNG seed
        """
        self._generator = random_cocycle_functional(
            self.dual_semigroup.algebra, int(h_dim), seed=int(seed), label="gns"
        )
        return self._generator

    @keyword("The product")
    def select_product(self, kind: str) -> ProductKind:
        """Select one of the five universal independences.

        Maps to scenario step:
        - "Given the <kind> product"
        """
        self._kind = ProductKind.parse(kind)
        return self._kind

    # =========================================================================
    # Convolution Keywords
    # =========================================================================

    @keyword("Evaluate convolution exponential")
    def evaluate_exponential(self, t: float, word: str) -> complex:
        """exp(t psi)(word) through the matrix exponential.

        Maps to scenario step:
        - 'When the convolution exponential is evaluated at t = <t> on the word "<word>"'
        """
        value = conv_exp(self.kind, self.dual_semigroup, self.generator, float(t), self._poly(word))
        print(f"✓ exp({float(t):g} psi)({word}) = {value:.12g}")
        return value

    @keyword("Evaluate exponential series")
    def evaluate_series(self, t: float, word: str, order: int = 8) -> complex:
        """Truncated sum of (t psi)^(star k)/k!."""
        return exp_series(
            self.kind, self.dual_semigroup, self.generator, float(t), self._poly(word), int(order)
        )

    @keyword("Convolution square value")
    def convolution_square(self, word: str) -> complex:
        """(psi star psi)(word)."""
        square = star(self.kind, self.dual_semigroup, self.generator, self.generator)
        return square.centered_value(tuple(word.split()))

    @keyword("Trotter error")
    def trotter_error(self, n: int, t: float, word: str) -> float:
        """|(delta + t psi/n)^(star n)(w) - exp(t psi)(w)|."""
        args = (self.kind, self.dual_semigroup, self.generator)
        b = self._poly(word)
        error = abs(trotter_exp(*args, float(t), int(n), b) - conv_exp(*args, float(t), b))
        print(f"✓ n = {n}: error {error:.12g}")
        return error

    @keyword("Value should be")
    def value_should_be(self, value: Any, expected: float, tol: float = 1e-9) -> None:
        """Compare a computed value with a closed form."""
        if not _close(value, expected, tol):
            raise AssertionError(f"Expected {expected}, got {value}")

    # =========================================================================
    # Positivity Keywords
    # =========================================================================

    @keyword("Every exponential on the grid is a state")
    def verify_schoenberg(self, cap: int = 4, all_kinds: bool = False) -> None:
        """Schoenberg check on the times 0.25, 0.5, 1, 2.

        Maps to scenario steps:
        - "When the Schoenberg correspondence is verified at degree 4 ..."
        - "Then every exponential on the grid is a state"
        """
        kinds = list(ProductKind) if all_kinds else [self.kind]
        for kind in kinds:
            report = schoenberg_verify(kind, self.dual_semigroup, self.generator, _TIMES, int(cap))
            if not report.passed:
                raise AssertionError(
                    f"{kind.value} Schoenberg check failed at stage {report.stage}"
                )
            print(f"✓ {kind.value}: min margin {report.min_margin:.3g}")

    @keyword("The q-matrix functional should be a state")
    def q_matrix_state(self, q: float, expected: bool) -> None:
        """Moment matrix [[1, 1, 1], [1, 1, q], [1, q, 1]] on {1, x1, x2}.

        Maps to scenario steps:
        - "Given the q-matrix functional with q = <q>"
        - "Then the state check result is <psd>"
        """
        q = float(q)
        algebra = get_dual_semigroup("primitive:2").algebra
        phi = LinearFunctional.from_table(
            algebra,
            {
                ("x1",): 1.0,
                ("x2",): 1.0,
                ("x1", "x1"): 1.0,
                ("x2", "x2"): 1.0,
                ("x1", "x2"): q,
                ("x2", "x1"): q,
            },
            hermitian=True,
        )
        want = str(expected).strip().lower() == "true"
        report = check_state(phi, 1)
        if report.passed is not want:
            raise AssertionError(
                f"state check returned {report.passed} (min eigenvalue "
                f"{report.min_eigenvalue:.3g}), expected {want}"
            )

    # =========================================================================
    # Levy Process Keywords
    # =========================================================================

    @keyword("Fock moment")
    def fock_vacuum_moment(self, flavor: str, truncation: int, t: float, word: str) -> complex:
        """<Omega, pi(word) Omega> on the bose or full Fock space.

        Maps to scenario step:
        - "When the <flavor> Fock realization with truncation 4 is evaluated ..."
        """
        spec = fock_spec_from_gns(gns_construct(self.generator, 3), flavor, int(truncation))
        return fock_moment(spec, tuple(word.split()), float(t))

    @keyword("Stationarity residual")
    def stationarity(self, shift: float, first: str, second: str) -> float:
        """Joint expectation on the grid 0, 1, 3 against the shifted grid."""
        dsg = self.dual_semigroup
        word = FreeProductElement.word(
            (dsg.algebra, dsg.algebra),
            [(0, tuple(first.split())), (1, tuple(second.split()))],
            centered=True,
        )
        return stationarity_residual(
            self.kind, dsg, self.generator, TimeGrid((0.0, 1.0, 3.0)), float(shift), word
        )

    # =========================================================================
    # Batch Job Keywords
    # =========================================================================

    @keyword("Run dualconv job")
    def run_job(self, command: str, job: str) -> int:
        """Run a shipped job file through the command line entry point.

        Maps to scenario step:
        - 'When the "<command>" command runs the job file "<job>"'

        Returns:
            The process exit code; the report is kept for later keywords
        """
        with tempfile.TemporaryDirectory() as tmp:
            out = Path(tmp) / "report.json"
            code = main([command, "--config", str(JOBS_DIR / job), "--out", str(out)])
            self._report = (
                json.loads(out.read_text(encoding="utf-8")) if out.exists() else None
            )
        _LOGGER.info("dualconv %s %s exited with %d", command, job, code)
        return code

    @keyword("The report is marked as")
    def report_outcome(self, outcome: str) -> None:
        if self._report is None:
            raise AssertionError("No report was written")
        want = outcome.strip().lower() == "passed"
        if self._report["passed"] is not want:
            raise AssertionError(f"report passed={self._report['passed']}, expected {outcome}")
