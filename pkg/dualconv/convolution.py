"""Convolution of functionals and convolution exponentials.

Functionals on the counit kernel ℬ are convolved as
``φ₁ ⋆ φ₂ = (φ₁ ⊙ φ₂) ∘ Δ``, the product being taken between the
normalized unitizations, so δ (the zero functional on ℬ) is the unit.

Exponentials live one level up, on the symmetric bialgebra S(ℬ) with the
comultiplication Δ_S = S(σ∘Δ). A monomial of S(ℬ) is a sorted tuple of
kernel basis words; the empty tuple is the unit. exp⋆ψ is the counit
coordinate of ``exp(T)`` on the finite sub-coalgebra generated by the
argument, where ``T = (id ⊗ D(ψ)) ∘ Δ_S``.
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import scipy.linalg

from dualconv.algebra import LinearFunctional, NCPolynomial, Word, centered_polynomial
from dualconv.dualsg import DualSemigroup, comultiply
from dualconv.exceptions import AlgebraMismatch, ClosureCapExceeded
from dualconv.products import ProductKind, eval_product, sigma_decompose
from dualconv_config import DEFAULTS

_LOGGER = logging.getLogger(__name__)

SymMonomial = tuple[Word, ...]
SymTensor = dict[tuple[SymMonomial, SymMonomial], complex]

UNIT: SymMonomial = ()


def _monomial(words: Iterable[Word]) -> SymMonomial:
    return tuple(sorted(words))


def kernel_value(phi: LinearFunctional, b: NCPolynomial) -> complex:
    """φ(b − δ(b)𝟏): the value of a kernel functional on the centered ``b``."""
    if b.algebra is not phi.algebra:
        raise AlgebraMismatch(
            f"functional on {phi.algebra.name} applied to {b.algebra.name}"
        )
    return sum((c * phi.centered_value(w) for w, c in b.items() if w), 0j)


def embed_symmetric(b: NCPolynomial) -> dict[SymMonomial, complex]:
    """i_ℬ(b − δ(b)𝟏) as single-factor monomials."""
    return {(w,): c for w, c in b.items() if w}


# ============================================================================
# Convolution of functionals on ℬ
# ============================================================================


def star(
    kind: ProductKind,
    dsg: DualSemigroup,
    phi1: LinearFunctional,
    phi2: LinearFunctional,
) -> LinearFunctional:
    """φ₁ ⋆ φ₂, evaluated lazily word by word."""
    kind = ProductKind(kind)
    for phi in (phi1, phi2):
        if phi.algebra is not dsg.algebra:
            raise AlgebraMismatch(
                f"functional on {phi.algebra.name} convolved over {dsg.name}"
            )
    algebra = dsg.algebra

    def rule(word: Word) -> complex:
        return eval_product(
            kind, phi1, phi2, comultiply(dsg, centered_polynomial(algebra, word))
        )

    return LinearFunctional(
        algebra,
        rule,
        hermitian=phi1.hermitian and phi2.hermitian,
        label=f"({phi1.label or 'φ'}⋆{phi2.label or 'φ'})",
    )


def star_power(
    kind: ProductKind, dsg: DualSemigroup, psi: LinearFunctional, n: int
) -> LinearFunctional:
    """Left-nested n-fold convolution power."""
    if n < 1:
        raise ValueError(f"star_power needs n >= 1, got {n}")
    result = psi
    for _ in range(n - 1):
        result = star(kind, dsg, result, psi)
    return result


# ============================================================================
# Functionals on S(ℬ)
# ============================================================================


class SymmetricFunctional:
    """Linear functional on S(ℬ) given by its values on monomials."""

    def __init__(self, rule: Callable[[SymMonomial], complex], label: str = "") -> None:
        self._rule = rule
        self.label = label
        self._memo: dict[SymMonomial, complex] = {}

    def __call__(self, monomial: SymMonomial) -> complex:
        cached = self._memo.get(monomial)
        if cached is None:
            cached = complex(self._rule(monomial))
            self._memo[monomial] = cached
        return cached

    def evaluate(self, element: Mapping[SymMonomial, complex]) -> complex:
        return sum((c * self(m) for m, c in element.items()), 0j)


class GeneratorFunctional(SymmetricFunctional):
    """D(ψ): ψ on single factors, zero on the unit and on longer monomials."""

    def __init__(self, base: LinearFunctional) -> None:
        self.base = base
        super().__init__(self._derivative, label=f"D({base.label or 'ψ'})")

    def _derivative(self, monomial: SymMonomial) -> complex:
        if len(monomial) != 1:
            return 0j
        return self.base.centered_value(monomial[0])


def lift_generator(psi: LinearFunctional) -> GeneratorFunctional:
    return GeneratorFunctional(psi)


def sym_functional(phi: LinearFunctional) -> SymmetricFunctional:
    """S(φ): the multiplicative extension with S(φ)(𝟏) = 1."""

    def rule(monomial: SymMonomial) -> complex:
        value = 1 + 0j
        for word in monomial:
            value *= phi.centered_value(word)
        return value

    return SymmetricFunctional(rule, label=f"S({phi.label or 'φ'})")


def symmetric_counit() -> SymmetricFunctional:
    return SymmetricFunctional(lambda m: 1.0 if m == UNIT else 0.0, label="ε")


def sym_delta(kind: ProductKind, dsg: DualSemigroup, monomial: SymMonomial) -> SymTensor:
    """Δ_S of a monomial, extended multiplicatively from single words."""
    kind = ProductKind(kind)
    key = ("monomial", kind, monomial)
    cached = dsg.sym_deltas.get(key)
    if cached is not None:
        return cached
    if not monomial:
        result: SymTensor = {(UNIT, UNIT): 1 + 0j}
    elif len(monomial) == 1:
        result = _sym_delta_word(kind, dsg, monomial[0])
    else:
        result = _tensor_product(
            sym_delta(kind, dsg, monomial[:-1]), sym_delta(kind, dsg, monomial[-1:])
        )
    dsg.sym_deltas.setdefault(key, result)
    return result


def _sym_delta_word(kind: ProductKind, dsg: DualSemigroup, word: Word) -> SymTensor:
    image = sigma_decompose(
        kind, comultiply(dsg, centered_polynomial(dsg.algebra, word))
    )
    result: SymTensor = defaultdict(complex)
    for sigma_monomial, coeff in image.terms.items():
        left = _monomial(w for side, w in sigma_monomial if side == 0)
        right = _monomial(w for side, w in sigma_monomial if side == 1)
        result[left, right] += coeff
    return dict(result)


def _tensor_product(a: SymTensor, b: SymTensor) -> SymTensor:
    result: SymTensor = defaultdict(complex)
    for (l1, r1), c1 in a.items():
        for (l2, r2), c2 in b.items():
            result[_monomial(l1 + l2), _monomial(r1 + r2)] += c1 * c2
    return {k: c for k, c in result.items() if abs(c) > DEFAULTS["drop_tolerance"]}


def sym_star(
    kind: ProductKind,
    dsg: DualSemigroup,
    f1: SymmetricFunctional,
    f2: SymmetricFunctional,
) -> SymmetricFunctional:
    """Convolution on S(ℬ) with respect to Δ_S."""

    def rule(monomial: SymMonomial) -> complex:
        return sum(
            (c * f1(left) * f2(right) for (left, right), c in sym_delta(kind, dsg, monomial).items()),
            0j,
        )

    return SymmetricFunctional(rule, label=f"({f1.label}⋆{f2.label})")


# ============================================================================
# Finite sub-coalgebras
# ============================================================================


@dataclass
class CoalgebraSlice:
    """Finite sub-coalgebra of S(ℬ): basis and structure constants.

    ``structure[i]`` maps ``(j, k)`` to the coefficient of ``b_j ⊗ b_k`` in
    Δ_S(b_i). The unit is always ``basis[0]``.
    """

    basis: list[SymMonomial]
    structure: list[dict[tuple[int, int], complex]]
    index: dict[SymMonomial, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.index:
            self.index = {m: i for i, m in enumerate(self.basis)}

    def __len__(self) -> int:
        return len(self.basis)

    def coordinates(self, element: Mapping[SymMonomial, complex]) -> np.ndarray:
        vector = np.zeros(len(self.basis), dtype=complex)
        for monomial, coeff in element.items():
            vector[self.index[monomial]] += coeff
        return vector

    def generator_matrix(self, functional: SymmetricFunctional) -> np.ndarray:
        """Matrix of T = (id ⊗ F) ∘ Δ_S acting on coordinate columns."""
        values = np.array([functional(m) for m in self.basis], dtype=complex)
        matrix = np.zeros((len(self.basis), len(self.basis)), dtype=complex)
        for i, terms in enumerate(self.structure):
            for (j, k), coeff in terms.items():
                matrix[j, i] += coeff * values[k]
        return matrix

    def counit_residual(self) -> float:
        """max |(ε⊗id)Δ_S − id| and |(id⊗ε)Δ_S − id| over the basis."""
        worst = 0.0
        for i, terms in enumerate(self.structure):
            left = np.zeros(len(self.basis), dtype=complex)
            right = np.zeros(len(self.basis), dtype=complex)
            for (j, k), coeff in terms.items():
                if j == 0:
                    left[k] += coeff
                if k == 0:
                    right[j] += coeff
            left[i] -= 1
            right[i] -= 1
            worst = max(worst, float(np.abs(left).max()), float(np.abs(right).max()))
        return worst


def _degree(dsg: DualSemigroup, monomial: SymMonomial) -> int:
    return sum(dsg.algebra.degree(w) for w in monomial)


def coalgebra_closure(
    kind: ProductKind,
    dsg: DualSemigroup,
    seed: NCPolynomial,
    degree_cap: int,
    max_size: int = DEFAULTS["closure_size_cap"],
) -> CoalgebraSlice:
    """Smallest Δ_S-closed span of basis monomials containing i_ℬ(seed)."""
    kind = ProductKind(kind)
    seeds = [m for m in embed_symmetric(seed)]
    filtration = max((_degree(dsg, m) for m in seeds), default=0)
    if filtration > degree_cap:
        raise ClosureCapExceeded(
            f"seed of degree {filtration} exceeds degree cap {degree_cap}"
        )
    basis: list[SymMonomial] = [UNIT]
    index: dict[SymMonomial, int] = {UNIT: 0}
    pending = list(seeds)

    def admit(monomial: SymMonomial) -> int:
        if monomial not in index:
            if _degree(dsg, monomial) > filtration:
                raise ClosureCapExceeded(
                    f"Δ_S raised the degree of {monomial} above {filtration}; "
                    f"{dsg.name} is not filtered"
                )
            if len(basis) >= max_size:
                raise ClosureCapExceeded(
                    f"sub-coalgebra of {seed!r} exceeds {max_size} basis elements"
                )
            index[monomial] = len(basis)
            basis.append(monomial)
            pending.append(monomial)
        return index[monomial]

    for monomial in seeds:
        if monomial not in index:
            index[monomial] = len(basis)
            basis.append(monomial)
    structure: dict[int, dict[tuple[int, int], complex]] = {}
    while pending:
        monomial = pending.pop()
        i = index[monomial]
        if i in structure:
            continue
        terms: dict[tuple[int, int], complex] = {}
        for (left, right), coeff in sym_delta(kind, dsg, monomial).items():
            terms[admit(left), admit(right)] = coeff
        structure[i] = terms
    structure.setdefault(0, {(0, 0): 1 + 0j})
    _LOGGER.debug(
        "Closure of %s under %s Δ_S on %s: %d basis monomials",
        seed,
        kind.value,
        dsg.name,
        len(basis),
    )
    return CoalgebraSlice(basis, [structure[i] for i in range(len(basis))], index)


# ============================================================================
# Exponentials
# ============================================================================


class ExponentialSemigroup:
    """φ_t = exp⋆(tψ), with closures and generator matrices cached per word."""

    def __init__(
        self,
        kind: ProductKind,
        dsg: DualSemigroup,
        psi: LinearFunctional,
        degree_cap: int | None = None,
    ) -> None:
        if psi.algebra is not dsg.algebra:
            raise AlgebraMismatch(
                f"generator on {psi.algebra.name} for {dsg.name}"
            )
        self.kind = ProductKind(kind)
        self.dsg = dsg
        self.psi = psi
        self.degree_cap = degree_cap
        self.generator = lift_generator(psi)
        self._slices: dict[Word, tuple[CoalgebraSlice, np.ndarray]] = {}
        self._values: dict[tuple[Word, float], complex] = {}
        self._functionals: dict[float, LinearFunctional] = {}

    def _slice(self, word: Word) -> tuple[CoalgebraSlice, np.ndarray]:
        cached = self._slices.get(word)
        if cached is None:
            cap = self.degree_cap if self.degree_cap is not None else self.dsg.algebra.degree(word)
            piece = coalgebra_closure(
                self.kind, self.dsg, NCPolynomial.word(self.dsg.algebra, *word), cap
            )
            cached = (piece, piece.generator_matrix(self.generator))
            self._slices[word] = cached
        return cached

    def word_value(self, t: float, word: Word) -> complex:
        if not word or t == 0:
            return 0j
        key = (word, float(t))
        cached = self._values.get(key)
        if cached is None:
            piece, matrix = self._slice(word)
            column = scipy.linalg.expm(t * matrix)[:, piece.index[(word,)]]
            cached = self._values[key] = complex(column[0])
        return cached

    def value(self, t: float, b: NCPolynomial) -> complex:
        if t < 0:
            _LOGGER.warning(
                "exp⋆(tψ) evaluated at t = %g < 0; positivity is only expected for t >= 0",
                t,
            )
        if b.algebra is not self.dsg.algebra:
            raise AlgebraMismatch(f"{b.algebra.name} is not {self.dsg.algebra.name}")
        return sum((c * self.word_value(t, w) for w, c in b.items() if w), 0j)

    def functional(self, t: float) -> LinearFunctional:
        """φ_t as a kernel functional (memoized per t)."""
        t = float(t)
        if t not in self._functionals:
            self._functionals[t] = LinearFunctional(
                self.dsg.algebra,
                lambda w, t=t: self.word_value(t, w),
                hermitian=self.psi.hermitian,
                label=f"exp⋆({t:g}ψ)",
            )
        return self._functionals[t]


def conv_exp(
    kind: ProductKind,
    dsg: DualSemigroup,
    psi: LinearFunctional,
    t: float,
    b: NCPolynomial,
) -> complex:
    """exp⋆(tψ)(b) through the matrix exponential on the generated slice."""
    return ExponentialSemigroup(kind, dsg, psi).value(t, b)


def exp_series(
    kind: ProductKind,
    dsg: DualSemigroup,
    psi: LinearFunctional,
    t: float,
    b: NCPolynomial,
    order: int = 8,
) -> complex:
    """Σ_{k ≤ order} tᵏ/k! · D(ψ)^{⋆k}(b), by recursion on S(ℬ)."""
    kind = ProductKind(kind)
    generator = lift_generator(psi)
    powers: dict[tuple[int, SymMonomial], complex] = {}

    def power(k: int, monomial: SymMonomial) -> complex:
        if k == 0:
            return 1 + 0j if monomial == UNIT else 0j
        key = (k, monomial)
        if key not in powers:
            powers[key] = sum(
                (
                    c * generator(left) * power(k - 1, right)
                    for (left, right), c in sym_delta(kind, dsg, monomial).items()
                    if len(left) == 1
                ),
                0j,
            )
        return powers[key]

    element = embed_symmetric(b)
    total = 0j
    for k in range(order + 1):
        total += t**k / math.factorial(k) * sum(
            (c * power(k, m) for m, c in element.items()), 0j
        )
    return total


# ============================================================================
# Trotter products
# ============================================================================


def trotter_exp(
    kind: ProductKind,
    dsg: DualSemigroup,
    psi: LinearFunctional,
    t: float,
    n: int,
    b: NCPolynomial,
    perturbation: Callable[[int], LinearFunctional] | None = None,
) -> complex:
    """((t/n)ψ + R_n)^{⋆n}(b), the unit δ being implicit in ⋆."""
    if n < 1:
        raise ValueError(f"trotter_exp needs n >= 1, got {n}")
    step = psi * (t / n)
    if perturbation is not None:
        step = step + perturbation(n)
    return kernel_value(star_power(kind, dsg, step, n), b)


@dataclass
class TrotterRow:
    n: int
    value: complex
    error: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "value": [self.value.real, self.value.imag],
            "error": self.error,
        }


@dataclass
class TrotterSweep:
    exact: complex
    rows: list[TrotterRow]

    @property
    def orders(self) -> list[float]:
        """Observed convergence orders between consecutive rows."""
        result = []
        for a, b in zip(self.rows, self.rows[1:]):
            if a.error > 0 and b.error > 0:
                result.append(math.log(a.error / b.error) / math.log(b.n / a.n))
            else:
                result.append(math.inf)
        return result

    def to_dict(self) -> dict[str, Any]:
        return {
            "exact": [self.exact.real, self.exact.imag],
            "rows": [row.to_dict() for row in self.rows],
            "orders": self.orders,
        }


def trotter_sweep(
    kind: ProductKind,
    dsg: DualSemigroup,
    psi: LinearFunctional,
    t: float,
    b: NCPolynomial,
    ns: Sequence[int] = (2, 4, 8, 16),
    perturbation: Callable[[int], LinearFunctional] | None = None,
) -> TrotterSweep:
    exact = conv_exp(kind, dsg, psi, t, b)
    rows = []
    previous_bound = None
    for n in ns:
        if perturbation is not None:
            bound = n * n * abs(kernel_value(perturbation(n), b))
            if previous_bound is not None and bound > 2 * previous_bound + 1e-12:
                _LOGGER.warning(
                    "Perturbation at n=%d has n²|R_n(b)| = %.3g, growing from %.3g",
                    n,
                    bound,
                    previous_bound,
                )
            previous_bound = bound
        value = trotter_exp(kind, dsg, psi, t, n, b, perturbation)
        rows.append(TrotterRow(n, value, abs(value - exact)))
    return TrotterSweep(exact, rows)


def pullback_approximation(
    kind: ProductKind,
    source: DualSemigroup,
    target: DualSemigroup,
    kappa: Callable[[NCPolynomial], NCPolynomial],
    psi: LinearFunctional,
    t: float,
    n: int,
    c: NCPolynomial,
) -> complex:
    """(γ_{t/n} ∘ κ)^{⋆n}(c) with γ_s = exp⋆(sψ) on the target.

    Converges to exp⋆(t·ψ∘κ)(c) on the source as n grows.
    """
    if n < 1:
        raise ValueError(f"pullback_approximation needs n >= 1, got {n}")
    gamma = ExponentialSemigroup(kind, target, psi).functional(t / n)
    step = gamma.compose(kappa, source.algebra)
    return kernel_value(star_power(kind, source, step, n), c)


def generator_estimate(semigroup: ExponentialSemigroup, b: NCPolynomial, h: float) -> complex:
    """Finite difference (φ_h(b) − δ(b))/h with δ = 0 on the kernel."""
    if h <= 0:
        raise ValueError(f"step must be positive, got {h}")
    return semigroup.value(h, b) / h


__all__ = [
    "CoalgebraSlice",
    "ExponentialSemigroup",
    "GeneratorFunctional",
    "LinearFunctional",
    "SymMonomial",
    "SymmetricFunctional",
    "TrotterRow",
    "TrotterSweep",
    "coalgebra_closure",
    "conv_exp",
    "embed_symmetric",
    "exp_series",
    "generator_estimate",
    "kernel_value",
    "lift_generator",
    "pullback_approximation",
    "star",
    "star_power",
    "sym_delta",
    "sym_functional",
    "sym_star",
    "symmetric_counit",
    "trotter_exp",
    "trotter_sweep",
]
