"""Positivity step definitions for BDD tests.

Covers conditional positivity, state checks and the Schoenberg
correspondence.
"""

from dualconv.algebra import LinearFunctional
from dualconv.dualsg import get_dual_semigroup
from dualconv.levy import schoenberg_verify
from dualconv.positivity import check_conditionally_positive, check_state
from dualconv.products import ProductKind
from pytest_bdd import given, then, when

from tests.scenario_context import ScenarioContext

_TIMES = [0.25, 0.5, 1.0, 2.0]


@when(
    "the Schoenberg correspondence is verified at degree {cap:d} "
    "on the times 0.25, 0.5, 1, 2"
)
def verify_schoenberg(cap: int, scenario_context: ScenarioContext) -> None:
    report = schoenberg_verify(
        scenario_context.kind,
        scenario_context.dual_semigroup,
        scenario_context.generator,
        _TIMES,
        cap,
    )
    scenario_context.report = [report]
    print(f"✓ {report.kind.value}: min margin {report.min_margin:.3g}")


@when(
    "the Schoenberg correspondence is verified for all five products "
    "at degree {cap:d} on the times 0.25, 0.5, 1, 2"
)
def verify_schoenberg_all_kinds(cap: int, scenario_context: ScenarioContext) -> None:
    scenario_context.report = [
        schoenberg_verify(
            kind, scenario_context.dual_semigroup, scenario_context.generator, _TIMES, cap
        )
        for kind in ProductKind
    ]
    for report in scenario_context.report:
        print(f"✓ {report.kind.value}: min margin {report.min_margin:.3g}")


@then("every exponential on the grid is a state")
def every_exponential_is_state(scenario_context: ScenarioContext) -> None:
    for report in scenario_context.report:
        assert report.conditionally_positive.passed, (
            f"Generator is not conditionally positive "
            f"(min eigenvalue {report.conditionally_positive.min_eigenvalue:.3g})"
        )
        for point in report.points:
            assert point.margin >= -1e-9, (
                f"{report.kind.value} at t = {point.t}: min eigenvalue {point.margin:.3g}"
            )
        assert report.passed, f"{report.kind.value} Schoenberg check failed"


@then("the generator is conditionally positive at degree {cap:d}")
def generator_is_cp(cap: int, scenario_context: ScenarioContext) -> None:
    report = check_conditionally_positive(scenario_context.generator, cap)
    assert report.passed, f"min eigenvalue {report.min_eigenvalue:.3g}"


@then("the generator is not a state at degree {cap:d}")
def generator_is_not_state(cap: int, scenario_context: ScenarioContext) -> None:
    report = check_state(scenario_context.generator, cap)
    assert not report.passed, "psi unexpectedly passes the state check"
    assert report.min_eigenvalue < 0
    scenario_context.report = report
    print(f"✓ State check fails with eigenvalue {report.min_eigenvalue:.3g}")


@then('the negative eigenvalue is found on the block spanned by 1 and "{word}"')
def negative_block(word: str, scenario_context: ScenarioContext) -> None:
    """The 2x2 block [[1, psi(w)], [psi(w*), psi(w* w)]] is already indefinite."""
    psi: LinearFunctional = scenario_context.generator
    w = tuple(word.split())
    block_det = 1 * psi.centered_value(w + w) - abs(psi.centered_value(w)) ** 2
    assert block_det.real < 0, f"block determinant {block_det}"
    witness = scenario_context.report.witness
    assert witness is not None, "failing state report carries no witness"


@given("the q-matrix functional with q = {q:g}")
def q_matrix_functional(q: float, scenario_context: ScenarioContext) -> None:
    """phi~ with moment matrix [[1, 1, 1], [1, 1, q], [1, q, 1]] on {1, x1, x2}."""
    dsg = get_dual_semigroup("primitive:2")
    scenario_context.dual_semigroup = dsg
    scenario_context.functional = LinearFunctional.from_table(
        dsg.algebra,
        {
            ("x1",): 1.0,
            ("x2",): 1.0,
            ("x1", "x1"): 1.0,
            ("x2", "x2"): 1.0,
            ("x1", "x2"): q,
            ("x2", "x1"): q,
        },
        hermitian=True,
        label=f"q={q:g}",
    )


@when("its state property is checked at degree {cap:d}")
def check_q_matrix(cap: int, scenario_context: ScenarioContext) -> None:
    scenario_context.report = check_state(scenario_context.functional, cap)
    print(f"✓ min eigenvalue {scenario_context.report.min_eigenvalue:.3g}")


@then("the state check result is {expected}")
def state_check_result(expected: str, scenario_context: ScenarioContext) -> None:
    want = expected.strip().lower() == "true"
    assert scenario_context.report.passed is want, (
        f"state check returned {scenario_context.report.passed}, expected {want}"
    )
