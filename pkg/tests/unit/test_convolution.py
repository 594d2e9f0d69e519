"""Unit tests for dualconv.convolution.

Tests cover:
- star and star_power of kernel functionals
- sub-coalgebra closures of S(B)
- ExponentialSemigroup against closed forms and the exponential series
- Trotter products, sweeps and the pullback approximation
"""

from __future__ import annotations

import pytest
import scipy.linalg

from dualconv.algebra import LinearFunctional, NCPolynomial
from dualconv.convolution import (
    ExponentialSemigroup,
    coalgebra_closure,
    conv_exp,
    exp_series,
    generator_estimate,
    kernel_value,
    pullback_approximation,
    star,
    star_power,
    sym_functional,
    sym_star,
    symmetric_counit,
    trotter_exp,
    trotter_sweep,
)
from dualconv.dualsg import get_dual_semigroup
from dualconv.exceptions import AlgebraMismatch, ClosureCapExceeded
from dualconv.products import ProductKind

X4 = ("x",) * 4

# exp⋆(tψ)(x⁴) / t² for the Gaussian generator
FOURTH_MOMENT = {
    ProductKind.TENSOR: 3.0,
    ProductKind.FREE: 2.0,
    ProductKind.BOOLEAN: 1.0,
    ProductKind.MONOTONE: 1.5,
    ProductKind.ANTIMONOTONE: 1.5,
}


def _poly(dsg, *letters):
    return NCPolynomial.word(dsg.algebra, *letters)


# -----------------------------------------------------------
# Convolution of functionals
# -----------------------------------------------------------


class TestStar:

    @pytest.mark.parametrize(
        ("kind", "expected"),
        [(ProductKind.TENSOR, 6), (ProductKind.FREE, 4), (ProductKind.BOOLEAN, 2)],
    )
    def test_square_of_gaussian_on_x4(self, primitive, gaussian, kind, expected):
        square = star(kind, primitive, gaussian, gaussian)
        assert square.centered_value(X4) == pytest.approx(expected)

    @pytest.mark.parametrize("kind", list(ProductKind))
    def test_square_of_gaussian_on_x2(self, primitive, gaussian, kind):
        square = star(kind, primitive, gaussian, gaussian)
        assert square.centered_value(("x", "x")) == pytest.approx(2)

    @pytest.mark.parametrize("kind", list(ProductKind))
    def test_zero_functional_is_the_unit(self, primitive, gaussian, kind):
        delta = LinearFunctional.zero(primitive.algebra)
        left = star(kind, primitive, delta, gaussian)
        right = star(kind, primitive, gaussian, delta)
        for word in primitive.algebra.word_basis(4):
            assert left.centered_value(word) == pytest.approx(gaussian.centered_value(word))
            assert right.centered_value(word) == pytest.approx(gaussian.centered_value(word))

    def test_star_power_one_is_identity(self, primitive, gaussian):
        assert star_power(ProductKind.FREE, primitive, gaussian, 1) is gaussian

    def test_star_power_needs_positive_n(self, primitive, gaussian):
        with pytest.raises(ValueError, match="n >= 1"):
            star_power(ProductKind.FREE, primitive, gaussian, 0)

    def test_functional_on_other_algebra(self, gaussian):
        dsg = get_dual_semigroup("freegroup:1")
        with pytest.raises(AlgebraMismatch):
            star(ProductKind.TENSOR, dsg, gaussian, gaussian)

    @pytest.mark.parametrize("kind", list(ProductKind))
    def test_symmetric_lift_agrees_on_single_words(self, primitive, kind):
        phi = LinearFunctional.from_table(
            primitive.algebra, {("x",): 0.5, ("x", "x"): 2.0, ("x", "x", "x"): -1.0}
        )
        lifted = sym_star(kind, primitive, sym_functional(phi), sym_functional(phi))
        direct = star(kind, primitive, phi, phi)
        for word in primitive.algebra.word_basis(3):
            assert lifted((word,)) == pytest.approx(direct.centered_value(word))

    def test_symmetric_counit(self):
        counit = symmetric_counit()
        assert counit(()) == 1
        assert counit((("x",),)) == 0


# -----------------------------------------------------------
# Sub-coalgebras
# -----------------------------------------------------------


class TestCoalgebraClosure:

    def test_minimal_closure_of_x2(self, primitive):
        piece = coalgebra_closure(ProductKind.TENSOR, primitive, _poly(primitive, "x", "x"), 2)
        assert piece.basis[0] == ()
        assert set(piece.basis) == {(), (("x",),), (("x", "x"),)}
        assert len(piece) == 3
        assert piece.counit_residual() < 1e-12

    @pytest.mark.parametrize("kind", list(ProductKind))
    def test_counit_laws_on_x4_closure(self, primitive, kind):
        piece = coalgebra_closure(kind, primitive, _poly(primitive, *X4), 4)
        assert piece.counit_residual() < 1e-12

    def test_seed_above_cap(self, primitive):
        with pytest.raises(ClosureCapExceeded, match="exceeds degree cap"):
            coalgebra_closure(ProductKind.FREE, primitive, _poly(primitive, *X4), 2)

    def test_size_cap(self, primitive):
        with pytest.raises(ClosureCapExceeded, match="basis elements"):
            coalgebra_closure(
                ProductKind.FREE, primitive, _poly(primitive, *X4), 4, max_size=3
            )


# -----------------------------------------------------------
# Exponentials
# -----------------------------------------------------------


class TestExponential:

    @pytest.mark.parametrize("kind", list(ProductKind))
    @pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
    def test_closed_forms(self, primitive, gaussian, kind, t):
        assert conv_exp(kind, primitive, gaussian, t, _poly(primitive, "x", "x")) == (
            pytest.approx(t, abs=1e-9)
        )
        assert conv_exp(kind, primitive, gaussian, t, _poly(primitive, *X4)) == (
            pytest.approx(FOURTH_MOMENT[kind] * t**2, abs=1e-9)
        )

    @pytest.mark.parametrize("kind", list(ProductKind))
    def test_odd_moments_vanish(self, primitive, gaussian, kind):
        semigroup = ExponentialSemigroup(kind, primitive, gaussian)
        assert semigroup.word_value(1.0, ("x", "x", "x")) == pytest.approx(0, abs=1e-12)

    @pytest.mark.parametrize("kind", list(ProductKind))
    def test_series_matches_matrix_exponential(self, primitive, kind):
        psi = LinearFunctional.from_table(
            primitive.algebra,
            {("x",): 0.3, ("x", "x"): 1.0, ("x", "x", "x"): 0.2, X4: 0.7},
            hermitian=True,
        )
        b = _poly(primitive, *X4) + _poly(primitive, "x") * 2
        exact = conv_exp(kind, primitive, psi, 0.4, b)
        assert exp_series(kind, primitive, psi, 0.4, b, order=8) == pytest.approx(
            exact, abs=1e-9
        )

    def test_counit_at_zero(self, primitive, gaussian):
        semigroup = ExponentialSemigroup(ProductKind.FREE, primitive, gaussian)
        assert semigroup.value(0.0, _poly(primitive, *X4)) == 0
        assert semigroup.word_value(1.0, ()) == 0

    @pytest.mark.parametrize("kind", list(ProductKind))
    def test_semigroup_property(self, primitive, gaussian, kind):
        semigroup = ExponentialSemigroup(kind, primitive, gaussian)
        product = star(kind, primitive, semigroup.functional(0.5), semigroup.functional(1.5))
        target = semigroup.functional(2.0)
        for word in primitive.algebra.word_basis(4):
            assert product.centered_value(word) == pytest.approx(
                target.centered_value(word), abs=1e-9
            )

    def test_functional_is_memoized(self, primitive, gaussian):
        semigroup = ExponentialSemigroup(ProductKind.TENSOR, primitive, gaussian)
        assert semigroup.functional(1) is semigroup.functional(1.0)

    def test_word_values_are_memoized(self, primitive, gaussian, monkeypatch):
        calls = []
        expm = scipy.linalg.expm
        monkeypatch.setattr(scipy.linalg, "expm", lambda a: calls.append(a) or expm(a))
        semigroup = ExponentialSemigroup(ProductKind.FREE, primitive, gaussian)
        for _ in range(3):
            assert semigroup.word_value(2.0, X4) == pytest.approx(8.0, abs=1e-9)
        semigroup.value(2.0, _poly(primitive, *X4) * 2)
        assert len(calls) == 1
        semigroup.word_value(1.0, X4)
        assert len(calls) == 2

    def test_negative_time_warns(self, primitive, gaussian, caplog):
        semigroup = ExponentialSemigroup(ProductKind.TENSOR, primitive, gaussian)
        with caplog.at_level("WARNING", logger="dualconv.convolution"):
            semigroup.value(-1.0, _poly(primitive, "x", "x"))
        assert "t = -1 < 0" in caplog.text

    def test_generator_estimate(self, primitive, gaussian):
        semigroup = ExponentialSemigroup(ProductKind.TENSOR, primitive, gaussian)
        b = _poly(primitive, "x", "x")
        assert generator_estimate(semigroup, b, 1e-3) == pytest.approx(1, abs=1e-9)
        with pytest.raises(ValueError, match="positive"):
            generator_estimate(semigroup, b, 0)

    def test_kernel_value_centers(self):
        dsg = get_dual_semigroup("freegroup:1")
        phi = LinearFunctional.from_table(dsg.algebra, {("g",): 0.25}, unit_value=1.0)
        b = _poly(dsg, "g") + NCPolynomial.one(dsg.algebra) * 7
        assert kernel_value(phi, b) == pytest.approx(-0.75)


# -----------------------------------------------------------
# Trotter products
# -----------------------------------------------------------


class TestTrotter:

    @pytest.mark.parametrize(("n", "expected"), [(1, 0.0), (2, 1.5), (4, 2.25), (8, 2.625)])
    def test_tensor_x4(self, primitive, gaussian, n, expected):
        value = trotter_exp(ProductKind.TENSOR, primitive, gaussian, 1.0, n, _poly(primitive, *X4))
        assert value == pytest.approx(expected, abs=1e-12)

    def test_needs_positive_n(self, primitive, gaussian):
        with pytest.raises(ValueError, match="n >= 1"):
            trotter_exp(ProductKind.TENSOR, primitive, gaussian, 1.0, 0, _poly(primitive, "x"))

    def test_sweep_reports_first_order(self, primitive, gaussian):
        sweep = trotter_sweep(
            ProductKind.TENSOR, primitive, gaussian, 1.0, _poly(primitive, *X4), (2, 4, 8)
        )
        assert sweep.exact == pytest.approx(3)
        assert [row.error for row in sweep.rows] == pytest.approx([1.5, 0.75, 0.375])
        assert sweep.orders == pytest.approx([1.0, 1.0])
        assert sweep.to_dict()["orders"] == pytest.approx([1.0, 1.0])

    def test_sweep_warns_on_growing_perturbation(self, primitive, gaussian, caplog):
        bump = LinearFunctional.from_table(primitive.algebra, {X4: 1.0})
        with caplog.at_level("WARNING", logger="dualconv.convolution"):
            trotter_sweep(
                ProductKind.TENSOR,
                primitive,
                gaussian,
                1.0,
                _poly(primitive, *X4),
                (2, 4),
                perturbation=lambda n: bump,
            )
        assert "growing" in caplog.text

    def test_pullback_along_identity_is_exact(self, primitive, gaussian):
        value = pullback_approximation(
            ProductKind.TENSOR,
            primitive,
            primitive,
            lambda p: p,
            gaussian,
            1.0,
            4,
            _poly(primitive, *X4),
        )
        assert value == pytest.approx(3, abs=1e-9)
