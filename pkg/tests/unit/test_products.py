"""Unit tests for dualconv.products.

Tests cover:
- ProductKind parsing
- eval_product on short alternating words for all five products
- sigma_decompose / evaluate_sigma
- fold_product nesting and arity checks
- the randomized axiom suite
"""

from __future__ import annotations

import pytest

from dualconv.algebra import FreeProductElement, LinearFunctional, free_algebra
from dualconv.exceptions import ArityMismatch, ConfigError
from dualconv.products import (
    ProductKind,
    check_axioms,
    eval_product,
    evaluate_sigma,
    fold_product,
    sigma_decompose,
)

X = ("x",)
XX = ("x", "x")


@pytest.fixture
def tx():
    return free_algebra(X)


@pytest.fixture
def phi1(tx) -> LinearFunctional:
    return LinearFunctional.from_table(tx, {X: 1.0, XX: 2.0})


@pytest.fixture
def phi2(tx) -> LinearFunctional:
    return LinearFunctional.from_table(tx, {X: 3.0, XX: 5.0})


def _word(tx, *legs):
    return FreeProductElement.word((tx,) * (max(k for k, _ in legs) + 1), list(legs))


class TestProductKind:

    @pytest.mark.parametrize("name", ["tensor", "FREE", " Boolean ", "monotone"])
    def test_parse_is_lenient(self, name):
        assert ProductKind.parse(name).value == name.strip().lower()

    def test_unknown_product(self):
        with pytest.raises(ConfigError, match="unknown product 'quantum'"):
            ProductKind.parse("quantum")

    def test_commutativity(self):
        assert ProductKind.FREE.commutative
        assert not ProductKind.MONOTONE.commutative
        assert not ProductKind.ANTIMONOTONE.commutative


# -----------------------------------------------------------
# Two-fold products
# -----------------------------------------------------------


class TestEvalProduct:

    @pytest.mark.parametrize(
        ("kind", "expected"),
        [
            ("tensor", 6),
            ("free", 6),
            ("boolean", 3),
            ("monotone", 6),
            ("antimonotone", 3),
        ],
    )
    def test_a_b_a(self, tx, phi1, phi2, kind, expected):
        u = _word(tx, (0, X), (1, X), (0, X))
        value = eval_product(ProductKind(kind), phi1, phi2, u)
        assert value == pytest.approx(expected)

    @pytest.mark.parametrize(
        ("kind", "expected"),
        [
            ("tensor", 10),
            # φ₁(a²)φ₂(b)² + φ₁(a)²φ₂(b²) − φ₁(a)²φ₂(b)²
            ("free", 14),
            ("boolean", 9),
            ("monotone", 18),
            ("antimonotone", 5),
        ],
    )
    def test_a_b_a_b(self, tx, phi1, phi2, kind, expected):
        u = _word(tx, (0, X), (1, X), (0, X), (1, X))
        value = eval_product(ProductKind(kind), phi1, phi2, u)
        assert value == pytest.approx(expected)

    def test_scalar_part_weighs_one(self, tx, phi1, phi2):
        u = FreeProductElement.one((tx, tx)) * 4
        assert eval_product(ProductKind.FREE, phi1, phi2, u) == 4

    def test_unital_picture_input_is_centered_first(self, tx, phi1, phi2):
        raw = FreeProductElement.word((tx, tx), [(0, X), (1, X)], centered=False)
        assert eval_product(ProductKind.BOOLEAN, phi1, phi2, raw) == pytest.approx(3)

    def test_needs_two_components(self, tx, phi1, phi2):
        u = _word(tx, (0, X), (1, X), (2, X))
        with pytest.raises(ArityMismatch):
            eval_product(ProductKind.TENSOR, phi1, phi2, u)


class TestSigma:

    def test_tensor_image(self, tx):
        image = sigma_decompose(ProductKind.TENSOR, _word(tx, (0, X), (1, X), (0, X)))
        assert image.terms == {((0, XX), (1, X)): 1}

    @pytest.mark.parametrize("kind", list(ProductKind))
    def test_evaluate_sigma_matches_eval_product(self, tx, phi1, phi2, kind):
        u = _word(tx, (0, X), (1, XX), (0, X), (1, X))
        image = sigma_decompose(kind, u)
        assert evaluate_sigma(image, phi1, phi2) == pytest.approx(
            eval_product(kind, phi1, phi2, u)
        )


# -----------------------------------------------------------
# n-fold products
# -----------------------------------------------------------


class TestFoldProduct:

    def test_single_component(self, tx, phi1):
        u = _word(tx, (0, XX))
        assert fold_product(ProductKind.FREE, [phi1], u) == pytest.approx(2)

    def test_three_tensor_factors(self, tx, phi1, phi2):
        u = _word(tx, (0, X), (1, X), (2, XX))
        value = fold_product(ProductKind.TENSOR, [phi1, phi2, phi2], u)
        assert value == pytest.approx(1 * 3 * 5)

    @pytest.mark.parametrize("kind", list(ProductKind))
    def test_left_and_right_nesting_agree(self, tx, phi1, phi2, kind):
        phi3 = LinearFunctional.from_table(tx, {X: -1.0, XX: 0.5})
        u = _word(tx, (0, X), (2, X), (1, XX), (0, X), (2, X))
        left = fold_product(kind, [phi1, phi2, phi3], u, "left")
        right = fold_product(kind, [phi1, phi2, phi3], u, "right")
        assert left == pytest.approx(right)

    def test_arity_mismatch(self, tx, phi1, phi2):
        with pytest.raises(ArityMismatch):
            fold_product(ProductKind.FREE, [phi1, phi2], _word(tx, (0, X), (2, X)))

    def test_bad_nesting(self, tx, phi1, phi2):
        with pytest.raises(ValueError, match="nesting"):
            fold_product(
                ProductKind.FREE, [phi1, phi2], _word(tx, (0, X), (1, X)), "middle"
            )


# -----------------------------------------------------------
# Axiom suite
# -----------------------------------------------------------


class TestAxioms:

    @pytest.mark.parametrize("kind", list(ProductKind))
    def test_every_product_conforms(self, kind):
        report = check_axioms(kind, trials=20, degree_cap=3, seed=5)
        assert report.conforms, report.to_dict()
        for axiom in ("A1", "A2", "A3", "A4"):
            assert report.checks[axiom].passed, axiom

    @pytest.mark.parametrize("kind", [ProductKind.MONOTONE, ProductKind.ANTIMONOTONE])
    def test_non_commutative_products_fail_a5_with_witness(self, kind):
        check = check_axioms(kind, trials=5, degree_cap=3, seed=1).checks["A5"]
        assert not check.passed
        assert not check.expected
        assert check.witness is not None

    def test_report_is_deterministic(self):
        first = check_axioms(ProductKind.FREE, trials=10, degree_cap=3, seed=9)
        second = check_axioms(ProductKind.FREE, trials=10, degree_cap=3, seed=9)
        assert first.to_dict() == second.to_dict()
