"""The five universal independence products and their axioms.

All products act on the kernel picture of a two-component free product.
A leg is passed around as a ``(side, payload)`` pair where the payload is
any element the side functional can evaluate and that supports ``*``
(a centered polynomial, or a whole free-product block when products are
nested). The same recursion runs numerically (values are complex numbers)
and symbolically (values are ``SigmaImage`` objects), which is what makes
``sigma_decompose`` agree with ``eval_product`` term by term.
"""

from __future__ import annotations

import logging
import operator
from collections import defaultdict
from collections.abc import Callable, Hashable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum
from functools import reduce
from typing import Any

import numpy as np

from dualconv.algebra import (
    AlgebraPresentation,
    AlternatingWord,
    FreeProductElement,
    LinearFunctional,
    NCPolynomial,
    Word,
    centered_polynomial,
    fp_apply_hom,
    fp_embed,
    free_algebra,
    swap_components,
)
from dualconv.exceptions import ArityMismatch, ConfigError, EvaluationDepthExceeded
from dualconv_config import DEFAULTS

_LOGGER = logging.getLogger(__name__)

SigmaMonomial = tuple[tuple[int, Word], ...]


class ProductKind(str, Enum):
    """Muraki's five universal products."""

    TENSOR = "tensor"
    FREE = "free"
    BOOLEAN = "boolean"
    MONOTONE = "monotone"
    ANTIMONOTONE = "antimonotone"

    @classmethod
    def parse(cls, name: str) -> ProductKind:
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            raise ConfigError(
                f"unknown product {name!r}; expected one of "
                f"{', '.join(kind.value for kind in cls)}"
            ) from None

    @property
    def commutative(self) -> bool:
        """Whether the product satisfies the commutativity axiom."""
        return self not in (ProductKind.MONOTONE, ProductKind.ANTIMONOTONE)


# ============================================================================
# Symbolic images in the symmetric algebra
# ============================================================================


class SigmaImage:
    """Linear combination of commutative monomials in (component, word) factors."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[SigmaMonomial, complex] | None = None) -> None:
        self.terms: dict[SigmaMonomial, complex] = {
            m: complex(c)
            for m, c in (terms or {}).items()
            if abs(c) > DEFAULTS["drop_tolerance"]
        }

    @classmethod
    def unit(cls) -> SigmaImage:
        return cls({(): 1})

    @classmethod
    def factor(cls, side: int, payload: NCPolynomial) -> SigmaImage:
        return cls({((side, w),): c for w, c in payload.items() if w})

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __add__(self, other: SigmaImage) -> SigmaImage:
        acc = defaultdict(complex, self.terms)
        for m, c in other.terms.items():
            acc[m] += c
        return SigmaImage(acc)

    def __neg__(self) -> SigmaImage:
        return SigmaImage({m: -c for m, c in self.terms.items()})

    def __mul__(self, other: SigmaImage | complex | float | int) -> SigmaImage:
        if isinstance(other, SigmaImage):
            acc: dict[SigmaMonomial, complex] = defaultdict(complex)
            for m1, c1 in self.terms.items():
                for m2, c2 in other.terms.items():
                    acc[tuple(sorted(m1 + m2))] += c1 * c2
            return SigmaImage(acc)
        return SigmaImage({m: c * other for m, c in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SigmaImage):
            return NotImplemented
        return self.terms == other.terms

    def __repr__(self) -> str:
        parts = [
            f"({c:.6g})" + "".join(f"{{{k}:{'·'.join(w)}}}" for k, w in m)
            for m, c in self.terms.items()
        ]
        return " + ".join(parts) or "0"


def evaluate_sigma(
    image: SigmaImage, phi1: LinearFunctional, phi2: LinearFunctional
) -> complex:
    """Apply S(φ₁) ⊗ S(φ₂) to a symbolic image."""
    phis = (phi1, phi2)
    total = 0j
    for monomial, coeff in image.terms.items():
        value = coeff
        for side, word in monomial:
            value *= phis[side].centered_value(word)
        total += value
    return total


# ============================================================================
# Core recursion
# ============================================================================

Leg = tuple[int, Any]


def _fuse(legs: Iterable[Leg]) -> tuple[Leg, ...] | None:
    """Multiply neighbouring payloads of the same side; None if a product vanishes."""
    fused: list[Leg] = []
    for side, payload in legs:
        if fused and fused[-1][0] == side:
            payload = fused[-1][1] * payload
            fused[-1] = (side, payload)
        else:
            fused.append((side, payload))
        if not payload:
            return None
    return tuple(fused)


class _ProductEvaluator:
    """Evaluates alternating leg sequences for one product kind.

    ``side_value(side, payload)`` gives the value of a single leg; ``one`` is
    the value of the empty word (1, or the unit monomial).
    """

    def __init__(
        self,
        kind: ProductKind,
        side_value: Callable[[int, Any], Any],
        one: Any,
        depth_cap: int = DEFAULTS["free_recursion_depth_cap"],
    ) -> None:
        self.kind = kind
        self._side_value = side_value
        self.one = one
        self.depth_cap = depth_cap
        self._legs: dict[Hashable, Any] = {}
        self._words: dict[Hashable, Any] = {}

    def leg(self, side: int, payload: Any) -> Any:
        key = (side, payload)
        if key not in self._legs:
            self._legs[key] = self._side_value(side, payload)
        return self._legs[key]

    def block(self, side: int, payloads: Sequence[Any]) -> Any:
        if not payloads:
            return self.one
        return self.leg(side, reduce(operator.mul, payloads))

    def singles(self, payloads: Iterable[tuple[int, Any]]) -> Any:
        return reduce(operator.mul, (self.leg(s, p) for s, p in payloads), self.one)

    def word(self, legs: tuple[Leg, ...]) -> Any:
        if not legs:
            return self.one
        side_0 = [p for s, p in legs if s == 0]
        side_1 = [p for s, p in legs if s == 1]
        if self.kind is ProductKind.BOOLEAN:
            return self.singles(legs)
        if self.kind is ProductKind.TENSOR:
            return self.block(0, side_0) * self.block(1, side_1)
        if self.kind is ProductKind.MONOTONE:
            return self.block(0, side_0) * self.singles((s, p) for s, p in legs if s == 1)
        if self.kind is ProductKind.ANTIMONOTONE:
            return self.singles((s, p) for s, p in legs if s == 0) * self.block(1, side_1)
        return self._free(legs, 0)

    def _free(self, legs: tuple[Leg, ...], depth: int) -> Any:
        # φ(Π(aᵢ − φ(aᵢ)𝟏)) = 0 on alternating words, solved for φ(a₁⋯aₙ)
        if not legs:
            return self.one
        if len(legs) == 1:
            return self.leg(*legs[0])
        cached = self._words.get(legs)
        if cached is not None:
            return cached
        if depth > self.depth_cap:
            raise EvaluationDepthExceeded(
                f"free product recursion deeper than {self.depth_cap}"
            )
        n = len(legs)
        negated = [-self.leg(*leg) for leg in legs]
        total = self.one * 0
        for mask in range((1 << n) - 1):
            weight = self.one
            for i in range(n):
                if not mask >> i & 1:
                    weight = weight * negated[i]
            if not weight:
                continue
            sub = _fuse(legs[i] for i in range(n) if mask >> i & 1)
            if sub is None:
                continue
            total = total + weight * self._free(sub, depth + 1)
        result = -total
        self._words[legs] = result
        return result


def _require_pair(u: FreeProductElement) -> FreeProductElement:
    if len(u.components) != 2:
        raise ArityMismatch(
            f"two-fold product applied to a family of {len(u.components)} components"
        )
    return u if u.centered else u.to_centered()


def _polynomial_legs(
    components: Sequence[AlgebraPresentation], word: AlternatingWord
) -> tuple[Leg, ...]:
    return tuple((k, centered_polynomial(components[k], w)) for k, w in word)


def _numeric(
    kind: ProductKind, phis: Sequence[Callable[[Any], complex]]
) -> _ProductEvaluator:
    return _ProductEvaluator(kind, lambda side, payload: phis[side](payload), 1 + 0j)


def eval_product(
    kind: ProductKind,
    phi1: LinearFunctional,
    phi2: LinearFunctional,
    u: FreeProductElement,
) -> complex:
    """(φ₁ ⊙ φ₂)(u) for a two-component free-product element.

    The scalar part of ``u`` is weighted by 1, i.e. the product is taken
    between the normalized unitizations of φ₁ and φ₂.
    """
    kind = ProductKind(kind)
    u = _require_pair(u)
    evaluator = _numeric(kind, (phi1, phi2))
    total = 0j
    for word, coeff in u.items():
        total += coeff * evaluator.word(_polynomial_legs(u.components, word))
    return total


def sigma_decompose(kind: ProductKind, u: FreeProductElement) -> SigmaImage:
    """σ(u): the symbolic image with (φ₁⊙φ₂)(u) = (S(φ₁)⊗S(φ₂))(σ(u))."""
    kind = ProductKind(kind)
    u = _require_pair(u)
    evaluator = _ProductEvaluator(kind, SigmaImage.factor, SigmaImage.unit())
    total = SigmaImage()
    for word, coeff in u.items():
        total = total + evaluator.word(_polynomial_legs(u.components, word)) * coeff
    return total


# ============================================================================
# n-fold products
# ============================================================================


def _single(phi: LinearFunctional, u: FreeProductElement) -> complex:
    total = 0j
    for word, coeff in u.items():
        if not word:
            total += coeff
        else:
            (_, leg), = word
            total += coeff * phi.centered_value(leg)
    return total


def fold_product(
    kind: ProductKind,
    functionals: Sequence[LinearFunctional],
    u: FreeProductElement,
    nesting: str = "left",
) -> complex:
    """(φ₁ ⊙ ⋯ ⊙ φₙ)(u) by left (default) or right nested two-fold products."""
    kind = ProductKind(kind)
    n = len(u.components)
    if len(functionals) != n:
        raise ArityMismatch(f"{len(functionals)} functionals for {n} components")
    if nesting not in ("left", "right"):
        raise ValueError(f"nesting must be 'left' or 'right', got {nesting!r}")
    if not u.centered:
        u = u.to_centered()
    if n == 1:
        return _single(functionals[0], u)
    if n == 2:
        return eval_product(kind, functionals[0], functionals[1], u)

    # side 0/1 blocks: components [0, n-1) | [n-1] or [0] | [1, n)
    cut = n - 1 if nesting == "left" else 1
    families = (u.components[:cut], u.components[cut:])
    inner = (functionals[:cut], functionals[cut:])

    def side_of(k: int) -> int:
        return 0 if k < cut else 1

    def side_value(side: int, payload: FreeProductElement) -> complex:
        return fold_product(kind, inner[side], payload, nesting)

    evaluator = _ProductEvaluator(kind, side_value, 1 + 0j)
    total = 0j
    for word, coeff in u.items():
        legs: list[Leg] = []
        run: list[tuple[int, Word]] = []
        for k, leg in word:
            if run and side_of(run[-1][0]) != side_of(k):
                legs.append(_block_payload(families, cut, run))
                run = []
            run.append((k, leg))
        if run:
            legs.append(_block_payload(families, cut, run))
        total += coeff * evaluator.word(tuple(legs))
    return total


def _block_payload(
    families: tuple[tuple[AlgebraPresentation, ...], ...],
    cut: int,
    run: list[tuple[int, Word]],
) -> Leg:
    side = 0 if run[0][0] < cut else 1
    offset = 0 if side == 0 else cut
    word = tuple((k - offset, leg) for k, leg in run)
    return side, FreeProductElement(families[side], {word: 1}, centered=True)


# ============================================================================
# Axiom suite
# ============================================================================

AXIOMS = ("A1", "A2", "A3", "A4", "A5")
_AXIOM_NAMES = {
    "A1": "restriction",
    "A2": "associativity",
    "A3": "functoriality",
    "A4": "factorization",
    "A5": "commutativity",
}


@dataclass
class AxiomCheck:
    axiom: str
    residual: float
    tolerance: float
    expected: bool
    trials: int = 0
    witness: AlternatingWord | None = None

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance

    @property
    def as_expected(self) -> bool:
        return self.passed == self.expected

    def to_dict(self) -> dict[str, Any]:
        return {
            "axiom": self.axiom,
            "name": _AXIOM_NAMES[self.axiom],
            "residual": self.residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "expected": self.expected,
            "trials": self.trials,
            "witness": (
                [[k, list(w)] for k, w in self.witness] if self.witness is not None else None
            ),
        }


@dataclass
class AxiomReport:
    kind: ProductKind
    trials: int
    degree_cap: int
    seed: int
    checks: dict[str, AxiomCheck] = field(default_factory=dict)

    @property
    def conforms(self) -> bool:
        """Every axiom passes or fails exactly as expected for the kind."""
        return all(check.as_expected for check in self.checks.values())

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "trials": self.trials,
            "degree_cap": self.degree_cap,
            "seed": self.seed,
            "conforms": self.conforms,
            "checks": [self.checks[a].to_dict() for a in AXIOMS if a in self.checks],
        }


def _scaled(a: complex, b: complex) -> float:
    return abs(a - b) / max(1.0, abs(a), abs(b))


class _AxiomProbe:
    """Random inputs on T(ℂx) for the axiom suite."""

    def __init__(self, degree_cap: int, seed: int) -> None:
        self.algebra = free_algebra(("x",))
        self.degree_cap = degree_cap
        self.rng = np.random.default_rng(seed)

    def complex(self) -> complex:
        return complex(self.rng.normal(), self.rng.normal())

    def functional(self) -> LinearFunctional:
        # substitutions in A3 double the degree
        table = {("x",) * m: self.complex() for m in range(1, 2 * self.degree_cap + 1)}
        return LinearFunctional.from_table(self.algebra, table)

    def word(self, n_components: int) -> AlternatingWord:
        budget = int(self.rng.integers(1, self.degree_cap + 1))
        legs: list[tuple[int, Word]] = []
        while budget > 0:
            choices = [k for k in range(n_components) if not legs or legs[-1][0] != k]
            k = int(self.rng.choice(choices))
            m = int(self.rng.integers(1, budget + 1))
            legs.append((k, ("x",) * m))
            budget -= m
        return tuple(legs)

    def element(self, word: AlternatingWord, n_components: int) -> FreeProductElement:
        return FreeProductElement((self.algebra,) * n_components, {word: 1}, centered=True)

    def substitution(self) -> Callable[[NCPolynomial], NCPolynomial]:
        """Homomorphism x ↦ a·x + b·x² of the counit kernel."""
        image = NCPolynomial(self.algebra, {("x",): self.complex(), ("x", "x"): self.complex()})

        def apply(p: NCPolynomial) -> NCPolynomial:
            result = NCPolynomial.zero(self.algebra)
            for word, coeff in p.items():
                term = NCPolynomial.one(self.algebra) * coeff
                for _ in word:
                    term = term * image
                result = result + term
            return result

        return apply


def check_axioms(
    kind: ProductKind,
    trials: int = DEFAULTS["axiom_trials"],
    degree_cap: int = DEFAULTS["degree_cap"],
    seed: int = DEFAULTS["seed"],
    tol: float = DEFAULTS["axiom_tolerance"],
) -> AxiomReport:
    """Randomized verification of A1 to A5 on T(ℂx) ⊔ T(ℂx)."""
    kind = ProductKind(kind)
    probe = _AxiomProbe(degree_cap, seed)
    report = AxiomReport(kind, trials, degree_cap, seed)
    worst: dict[str, tuple[float, AlternatingWord | None]] = {a: (0.0, None) for a in AXIOMS}

    def record(axiom: str, a: complex, b: complex, word: AlternatingWord) -> None:
        residual = _scaled(a, b)
        if residual > worst[axiom][0]:
            worst[axiom] = (residual, word)

    pair = (probe.algebra, probe.algebra)
    probe_word: AlternatingWord = ((0, ("x",)), (1, ("x",)), (0, ("x",)))
    for trial in range(trials):
        phi1, phi2, phi3 = probe.functional(), probe.functional(), probe.functional()

        # A1: i_k(b) sees only φ_k
        m = int(probe.rng.integers(1, degree_cap + 1))
        k = int(probe.rng.integers(0, 2))
        single = ((k, ("x",) * m),)
        record(
            "A1",
            eval_product(kind, phi1, phi2, probe.element(single, 2)),
            (phi1, phi2)[k].centered_value(("x",) * m),
            single,
        )

        word3 = probe.word(3)
        u3 = probe.element(word3, 3)
        record(
            "A2",
            fold_product(kind, (phi1, phi2, phi3), u3, "left"),
            fold_product(kind, (phi1, phi2, phi3), u3, "right"),
            word3,
        )

        word2 = probe_word if trial == 0 else probe.word(2)
        u2 = probe.element(word2, 2)
        j1, j2 = probe.substitution(), probe.substitution()
        mapped = fp_apply_hom(
            [
                lambda p: fp_embed(0, j1(p), pair, centered=True),
                lambda p: fp_embed(1, j2(p), pair, centered=True),
            ],
            u2,
            FreeProductElement.one(pair, centered=True),
        )
        record(
            "A3",
            eval_product(
                kind,
                phi1.compose(j1, probe.algebra),
                phi2.compose(j2, probe.algebra),
                u2,
            ),
            eval_product(kind, phi1, phi2, mapped),
            word2,
        )

        m1 = int(probe.rng.integers(1, max(2, degree_cap)))
        m2 = int(probe.rng.integers(1, degree_cap - m1 + 1)) if degree_cap > m1 else 1
        b1, b2 = ("x",) * m1, ("x",) * m2
        expected = phi1.centered_value(b1) * phi2.centered_value(b2)
        for word in (((0, b1), (1, b2)), ((1, b2), (0, b1))):
            record("A4", eval_product(kind, phi1, phi2, probe.element(word, 2)), expected, word)

        record(
            "A5",
            eval_product(kind, phi1, phi2, u2),
            eval_product(kind, phi2, phi1, swap_components(u2)),
            word2,
        )

    for axiom in AXIOMS:
        residual, witness = worst[axiom]
        expected = axiom != "A5" or kind.commutative
        check = AxiomCheck(axiom, residual, tol, expected, trials)
        if not check.passed:
            check.witness = witness
        report.checks[axiom] = check
    _LOGGER.debug(
        "Axiom suite for %s: %s",
        kind.value,
        ", ".join(f"{a}={c.residual:.2e}" for a, c in report.checks.items()),
    )
    if not report.conforms:
        _LOGGER.warning("Product %s does not behave as expected on the axiom suite", kind.value)
    return report


__all__ = [
    "AXIOMS",
    "AxiomCheck",
    "AxiomReport",
    "ProductKind",
    "SigmaImage",
    "SigmaMonomial",
    "check_axioms",
    "eval_product",
    "evaluate_sigma",
    "fold_product",
    "sigma_decompose",
    "swap_components",
]
