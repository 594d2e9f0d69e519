"""Convolution step definitions for BDD tests.

Covers closed-form moments, the series oracle, semigroup and counit laws,
and Trotter approximations.
"""

import pytest
from dualconv.algebra import LinearFunctional, NCPolynomial
from dualconv.convolution import (
    ExponentialSemigroup,
    conv_exp,
    exp_series,
    star,
    trotter_exp,
    trotter_sweep,
)
from dualconv.levy import semigroup_residual
from pytest_bdd import then, when

from tests.scenario_context import ScenarioContext

MOMENT_TOLERANCE = 1e-9


def _word(scenario_context: ScenarioContext, text: str) -> NCPolynomial:
    return NCPolynomial.word(scenario_context.dual_semigroup.algebra, *text.split())


@when('the convolution exponential is evaluated at t = {t:g} on the word "{word}"')
def evaluate_exponential(t: float, word: str, scenario_context: ScenarioContext) -> None:
    """exp(t psi)(w) through the matrix exponential."""
    b = _word(scenario_context, word)
    value = conv_exp(
        scenario_context.kind, scenario_context.dual_semigroup, scenario_context.generator, t, b
    )
    scenario_context.remember("exp", value)
    scenario_context.remember("t", t)
    scenario_context.remember("word", word)
    print(f"✓ exp({t:g} psi)({word}) = {value:.12g}")


@then("the value is {expected:g}")
def value_is(expected: float, scenario_context: ScenarioContext) -> None:
    """Compare with the closed form."""
    value = scenario_context.recall("exp")
    assert value == pytest.approx(expected, abs=MOMENT_TOLERANCE), (
        f"Expected {expected}, got {value}"
    )


@then("the truncated exponential series of order {order:d} agrees")
def series_agrees(order: int, scenario_context: ScenarioContext) -> None:
    """Independent oracle: sum of (t psi)^(star k)/k! up to the order."""
    t = scenario_context.recall("t")
    b = _word(scenario_context, scenario_context.recall("word"))
    series = exp_series(
        scenario_context.kind,
        scenario_context.dual_semigroup,
        scenario_context.generator,
        t,
        b,
        order,
    )
    value = scenario_context.recall("exp")
    assert series == pytest.approx(value, abs=MOMENT_TOLERANCE), (
        f"Series of order {order} gives {series}, matrix exponential {value}"
    )
    print(f"✓ Series agrees: {series:.12g}")


@then(
    "exp(s psi) star exp(t psi) equals exp((s+t) psi) up to degree {cap:d} "
    "for s = {s:g} and t = {t:g}"
)
def semigroup_law(cap: int, s: float, t: float, scenario_context: ScenarioContext) -> None:
    """phi_s star phi_t = phi_(s+t) on every word up to the cap."""
    dsg = scenario_context.dual_semigroup
    semigroup = ExponentialSemigroup(scenario_context.kind, dsg, scenario_context.generator)
    residual = semigroup_residual(scenario_context.kind, dsg, semigroup, s, t, cap)
    assert residual < 1e-9, f"Semigroup residual {residual:.3g}"
    print(f"✓ Semigroup residual {residual:.2e}")


@then("exp(0 psi) is the counit on every word up to degree {cap:d}")
def counit_at_zero(cap: int, scenario_context: ScenarioContext) -> None:
    """phi_0 vanishes on the kernel, exactly."""
    dsg = scenario_context.dual_semigroup
    semigroup = ExponentialSemigroup(scenario_context.kind, dsg, scenario_context.generator)
    for word in dsg.algebra.word_basis(cap):
        assert semigroup.word_value(0.0, word) == 0, f"phi_0({word}) is not 0"
    print("✓ phi_0 = delta")


@when("psi is convolved with itself")
def convolve_with_itself(scenario_context: ScenarioContext) -> None:
    psi = scenario_context.generator
    scenario_context.functional = star(
        scenario_context.kind, scenario_context.dual_semigroup, psi, psi
    )


@then('the convolution square takes the value {expected:g} on the word "{word}"')
def convolution_square_value(
    expected: float, word: str, scenario_context: ScenarioContext
) -> None:
    functional: LinearFunctional = scenario_context.functional
    value = functional.centered_value(tuple(word.split()))
    assert value == pytest.approx(expected, abs=1e-12), (
        f"(psi star psi)({word}) = {value}, expected {expected}"
    )


@when(
    'the Trotter approximation with n = {n:d} is evaluated at t = {t:g} on the word "{word}"'
)
def trotter_approximation(
    n: int, t: float, word: str, scenario_context: ScenarioContext
) -> None:
    """(delta + t psi/n)^(star n)(w) against the exact exponential."""
    b = _word(scenario_context, word)
    args = (scenario_context.kind, scenario_context.dual_semigroup, scenario_context.generator)
    approximation = trotter_exp(*args, t, n, b)
    exact = conv_exp(*args, t, b)
    scenario_context.remember("trotter_error", abs(approximation - exact))
    print(f"✓ n = {n}: error {abs(approximation - exact):.12g}")


@then("the Trotter error is 3/{n:d} within {tol:g}")
def trotter_error_is(n: int, tol: float, scenario_context: ScenarioContext) -> None:
    error = scenario_context.recall("trotter_error")
    assert abs(error - 3 / n) <= tol, f"Trotter error {error}, expected {3 / n}"


@when(
    'the Trotter sweep over n = 2, 4, 8, 16 is run on the word "{word}" '
    "with the perturbation x^4 / n^2"
)
def perturbed_trotter_sweep(word: str, scenario_context: ScenarioContext) -> None:
    """R_n = (x^4 -> 1)/n^2 added to every step."""
    dsg = scenario_context.dual_semigroup
    bump = LinearFunctional.from_table(dsg.algebra, {("x",) * 4: 1.0}, label="R")
    scenario_context.report = trotter_sweep(
        scenario_context.kind,
        dsg,
        scenario_context.generator,
        1.0,
        _word(scenario_context, word),
        (2, 4, 8, 16),
        perturbation=lambda n: bump * (1.0 / n**2),
    )
    print(f"✓ Orders: {scenario_context.report.orders}")


@then("the observed convergence order is at least 1")
def convergence_order(scenario_context: ScenarioContext) -> None:
    orders = scenario_context.report.orders
    assert all(order >= 1 - 1e-9 for order in orders), f"Observed orders {orders}"


@then("the Trotter error is 2/n for every n")
def perturbed_error(scenario_context: ScenarioContext) -> None:
    for row in scenario_context.report.rows:
        assert row.error == pytest.approx(2 / row.n, abs=1e-10), (
            f"n = {row.n}: error {row.error}, expected {2 / row.n}"
        )
