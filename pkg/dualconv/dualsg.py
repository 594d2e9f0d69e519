"""Dual semigroups: comultiplication into free products and its laws.

Comultiplications are stored in the unital picture, one free-product image
per generator, and extended to words multiplicatively. The kernel picture
(the one convolution works in) is obtained on demand by centering the legs
and dropping the scalar part, i.e. ``Δb = Δ̃(b − δ(b)𝟏)``.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any

from dualconv.algebra import (
    AlgebraPresentation,
    FreeProductElement,
    GeneratorSymbol,
    NCPolynomial,
    Word,
    centered_polynomial,
    fp_apply_hom,
    fp_embed,
    free_algebra,
    free_group_algebra,
    free_group_names,
    unitary_algebra,
    unitary_generator_names,
)
from dualconv.exceptions import (
    AlgebraMismatch,
    ClosureCapExceeded,
    ConfigError,
    NoAntipode,
)
from dualconv_config import DEFAULTS

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DualSemigroup:
    """A *-algebra with a comultiplication Δ: ℬ → ℬ ⊔ ℬ.

    ``delta_on_generators`` maps every generator (adjoints included) to its
    image in the unital picture. ``flagged`` marks user data whose
    homomorphy was never verified.
    """

    name: str
    algebra: AlgebraPresentation
    delta_on_generators: Mapping[str, FreeProductElement]
    antipode_on_generators: Mapping[str, NCPolynomial] | None = None
    flagged: bool = False
    lifted_from: DualSemigroup | None = None
    letter_words: Mapping[str, Word] = field(default_factory=dict)
    _raw_deltas: dict[Word, FreeProductElement] = field(
        default_factory=dict, init=False, repr=False
    )
    sym_deltas: dict[Any, Any] = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self) -> None:
        pair = (self.algebra, self.algebra)
        for g in self.algebra.generators:
            image = self.delta_on_generators.get(g.name)
            if image is None:
                raise ConfigError(f"{self.name}: no comultiplication for {g.name!r}")
            if image.centered or image.components != pair:
                raise ConfigError(
                    f"{self.name}: image of {g.name!r} must be a unital-picture "
                    f"element of {self.algebra.name} ⊔ {self.algebra.name}"
                )
        if self.antipode_on_generators is not None:
            for g in self.algebra.generators:
                image = self.antipode_on_generators.get(g.name)
                if image is None or image.algebra is not self.algebra:
                    raise ConfigError(f"{self.name}: no antipode image for {g.name!r}")

    @property
    def components(self) -> tuple[AlgebraPresentation, AlgebraPresentation]:
        return self.algebra, self.algebra

    @property
    def has_antipode(self) -> bool:
        return self.antipode_on_generators is not None

    def raw_delta(self, word: Word) -> FreeProductElement:
        """Unital-picture Δ̃ of a word: ordered product of generator images."""
        cached = self._raw_deltas.get(word)
        if cached is not None:
            return cached
        if not word:
            result = FreeProductElement.one(self.components, centered=False)
        else:
            result = self.raw_delta(word[:-1]) * self.delta_on_generators[word[-1]]
        self._raw_deltas.setdefault(word, result)
        return result

    def antipode(self, p: NCPolynomial) -> NCPolynomial:
        """Homomorphic extension of the antipode to ``p``."""
        if self.antipode_on_generators is None:
            raise NoAntipode(f"{self.name} has no antipode")
        result = NCPolynomial.zero(self.algebra)
        for word, coeff in p.items():
            term = NCPolynomial.one(self.algebra) * coeff
            for letter in word:
                term = term * self.antipode_on_generators[letter]
            result = result + term
        return result


# ============================================================================
# Built-in dual semigroups
# ============================================================================


def primitive_dual_semigroup(n_generators: int = 1) -> DualSemigroup:
    """T(𝒱) with Δv = i₁(v) + i₂(v) and antipode v ↦ −v."""
    if n_generators < 1:
        raise ConfigError(f"primitive dual semigroup needs >= 1 generator, got {n_generators}")
    names = ("x",) if n_generators == 1 else tuple(f"x{i}" for i in range(1, n_generators + 1))
    algebra = free_algebra(names)
    pair = (algebra, algebra)
    delta = {
        name: FreeProductElement(pair, {((0, (name,)),): 1, ((1, (name,)),): 1}, centered=False)
        for name in names
    }
    antipode = {name: -NCPolynomial.word(algebra, name) for name in names}
    return DualSemigroup(f"primitive:{n_generators}", algebra, delta, antipode)


def unitary_dual_semigroup(d: int) -> DualSemigroup:
    """K⟨d⟩ with Δx_kl = Σ_n ι₁(x_kn)ι₂(x_nl) and S x_kl = x*_lk."""
    algebra = unitary_algebra(d)
    pair = (algebra, algebra)
    name = {(k, l): n for k, l, n, _ in unitary_generator_names(d)}
    star = {(k, l): a for k, l, _, a in unitary_generator_names(d)}
    delta: dict[str, FreeProductElement] = {}
    antipode: dict[str, NCPolynomial] = {}
    for (k, l), x in name.items():
        delta[x] = FreeProductElement(
            pair,
            {((0, (name[k, n],)), (1, (name[n, l],))): 1 for n in range(1, d + 1)},
            centered=False,
        )
        # (x_kl)* = Σ_n ι₂(x*_nl) ι₁(x*_kn)
        delta[star[k, l]] = FreeProductElement(
            pair,
            {((1, (star[n, l],)), (0, (star[k, n],))): 1 for n in range(1, d + 1)},
            centered=False,
        )
        antipode[x] = NCPolynomial.word(algebra, star[l, k])
        antipode[star[k, l]] = NCPolynomial.word(algebra, name[l, k])
    return DualSemigroup(f"unitary:{d}", algebra, delta, antipode)


def free_group_dual_semigroup(n: int) -> DualSemigroup:
    """ℂF_n with Δg = ι₁(g)ι₂(g) and S g = g⁻¹."""
    algebra = free_group_algebra(n)
    pair = (algebra, algebra)
    delta: dict[str, FreeProductElement] = {}
    antipode: dict[str, NCPolynomial] = {}
    for g, inverse in free_group_names(n):
        delta[g] = FreeProductElement(pair, {((0, (g,)), (1, (g,))): 1}, centered=False)
        delta[inverse] = FreeProductElement(
            pair, {((1, (inverse,)), (0, (inverse,))): 1}, centered=False
        )
        antipode[g] = NCPolynomial.word(algebra, inverse)
        antipode[inverse] = NCPolynomial.word(algebra, g)
    return DualSemigroup(f"freegroup:{n}", algebra, delta, antipode)


_BUILTINS: dict[str, Callable[[int], DualSemigroup]] = {
    "primitive": primitive_dual_semigroup,
    "unitary": unitary_dual_semigroup,
    "freegroup": free_group_dual_semigroup,
}


@lru_cache(maxsize=None)
def get_dual_semigroup(name: str) -> DualSemigroup:
    """Look up a built-in by its registry name, e.g. ``"unitary:2"``."""
    family, _, size = name.partition(":")
    if family not in _BUILTINS:
        raise ConfigError(
            f"unknown dual semigroup {name!r}; expected one of "
            f"{', '.join(f'{f}:<n>' for f in _BUILTINS)}"
        )
    try:
        count = int(size) if size else 1
    except ValueError:
        raise ConfigError(f"bad size in dual semigroup name {name!r}") from None
    if count < 1:
        raise ConfigError(f"dual semigroup size must be positive in {name!r}")
    return _BUILTINS[family](count)


def user_dual_semigroup(
    name: str,
    algebra: AlgebraPresentation,
    delta_on_generators: Mapping[str, FreeProductElement],
    antipode_on_generators: Mapping[str, NCPolynomial] | None = None,
) -> DualSemigroup:
    """Accept a user comultiplication; it is flagged, not verified."""
    _LOGGER.warning(
        "Dual semigroup %s is user supplied; homomorphy is only checked up to "
        "the degree cap of check_dualsg_laws",
        name,
    )
    return DualSemigroup(
        name, algebra, delta_on_generators, antipode_on_generators, flagged=True
    )


# ============================================================================
# Comultiplication
# ============================================================================


def comultiply(
    dsg: DualSemigroup, p: NCPolynomial, *, centered: bool = True
) -> FreeProductElement:
    """Δ applied to ``p``.

    With ``centered=True`` (kernel picture) the result is Δ(p − δ(p)𝟏) with
    centered legs and no scalar part. With ``centered=False`` it is the
    unital Δ̃(p).
    """
    if p.algebra is not dsg.algebra:
        raise AlgebraMismatch(
            f"{dsg.name} comultiplies {dsg.algebra.name}, got {p.algebra.name}"
        )
    result = FreeProductElement.zero(dsg.components, centered=False)
    for word, coeff in p.items():
        result = result + dsg.raw_delta(word) * coeff
    if not centered:
        return result
    return result.to_centered().without_scalar()


def iterate_delta(
    dsg: DualSemigroup, n: int, p: NCPolynomial, *, mirrored: bool = False
) -> FreeProductElement:
    """Δ_n(p) into n copies: Δ_0 = 0, Δ_1 = i₁, Δ_{n+1} = (Δ ⨿ id)∘Δ_n.

    ``mirrored`` uses (id ⨿ Δ) on the last copy instead; the two agree by
    coassociativity.
    """
    if n < 0:
        raise ValueError(f"iterate_delta needs n >= 0, got {n}")
    algebra = dsg.algebra
    if n == 0:
        return FreeProductElement.zero((), centered=True)
    current = fp_embed(0, p.kernel_part(), (algebra,), centered=True)
    for size in range(1, n):
        target = (algebra,) * (size + 1)
        split = size - 1 if mirrored else 0

        def apply(q: NCPolynomial, k: int, split=split, target=target):
            if k == split:
                return comultiply(dsg, q).relabel({0: split, 1: split + 1}, target)
            shifted = k + 1 if k > split else k
            return fp_embed(shifted, q, target, centered=True)

        current = fp_apply_hom(
            [lambda q, k=k: apply(q, k) for k in range(size)],
            current,
            FreeProductElement.one(target, centered=True),
        )
    return current


# ============================================================================
# Law checks
# ============================================================================


@dataclass
class LawCheck:
    """One bounded identity check with its worst residual."""

    name: str
    residual: float
    tolerance: float
    passed: bool
    witness: Word | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "witness": list(self.witness) if self.witness is not None else None,
        }


@dataclass
class LawReport:
    subject: str
    degree_cap: int
    checks: list[LawCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def max_residual(self) -> float:
        return max((check.residual for check in self.checks), default=0.0)

    def check(self, name: str) -> LawCheck:
        for entry in self.checks:
            if entry.name == name:
                return entry
        raise KeyError(name)

    def to_dict(self) -> dict[str, Any]:
        return {
            "subject": self.subject,
            "degree_cap": self.degree_cap,
            "passed": self.passed,
            "max_residual": self.max_residual,
            "checks": [check.to_dict() for check in self.checks],
        }


class _Worst:
    """Tracks the largest residual seen and the word producing it."""

    def __init__(self) -> None:
        self.residual = 0.0
        self.witness: Word | None = None

    def update(self, residual: float, word: Word) -> None:
        if residual > self.residual:
            self.residual, self.witness = residual, word

    def entry(self, name: str, tol: float) -> LawCheck:
        passed = self.residual <= tol
        return LawCheck(name, self.residual, tol, passed, None if passed else self.witness)


def check_dualsg_laws(
    dsg: DualSemigroup,
    degree_cap: int,
    tol: float = DEFAULTS["law_tolerance"],
) -> LawReport:
    """Bounded verification of homomorphy, counit laws and coassociativity."""
    if degree_cap < 1:
        raise ValueError(f"degree_cap must be >= 1, got {degree_cap}")
    algebra = dsg.algebra
    report = LawReport(dsg.name, degree_cap)

    homomorphism = _Worst()
    for rule in algebra.rules:
        lhs = FreeProductElement.one(dsg.components, centered=False)
        for letter in rule.lhs:
            lhs = lhs * dsg.delta_on_generators[letter]
        rhs = FreeProductElement.zero(dsg.components, centered=False)
        for word, coeff in rule.rhs:
            rhs = rhs + dsg.raw_delta(word) * coeff
        homomorphism.update(lhs.max_abs_difference(rhs), rule.lhs)
    report.checks.append(homomorphism.entry("homomorphism", tol))

    words = algebra.word_basis(degree_cap)
    unit = NCPolynomial.one(algebra)
    zero_map = lambda q: NCPolynomial.zero(algebra)  # noqa: E731
    identity = lambda q: q  # noqa: E731
    counit_left, counit_right, coassociativity = _Worst(), _Worst(), _Worst()
    for word in words:
        element = centered_polynomial(algebra, word)
        delta = comultiply(dsg, element)
        left = fp_apply_hom([zero_map, identity], delta, unit)
        right = fp_apply_hom([identity, zero_map], delta, unit)
        counit_left.update(left.max_abs_difference(element), word)
        counit_right.update(right.max_abs_difference(element), word)
        coassociativity.update(
            iterate_delta(dsg, 3, element).max_abs_difference(
                iterate_delta(dsg, 3, element, mirrored=True)
            ),
            word,
        )
    report.checks.append(counit_left.entry("counit-left", tol))
    report.checks.append(counit_right.entry("counit-right", tol))
    report.checks.append(coassociativity.entry("coassociativity", tol))

    _LOGGER.debug(
        "Law check of %s at degree %d over %d words: max residual %.3g",
        dsg.name,
        degree_cap,
        len(words),
        report.max_residual,
    )
    if dsg.flagged and report.passed:
        _LOGGER.info("User dual semigroup %s passes laws up to degree %d", dsg.name, degree_cap)
    return report


def antipode_check(
    dsg: DualSemigroup,
    degree_cap: int,
    tol: float = DEFAULTS["law_tolerance"],
) -> LawReport:
    """(S ⊔ id)∘Δ̃ = δ(·)𝟏 = (id ⊔ S)∘Δ̃ on words up to the cap."""
    if not dsg.has_antipode:
        raise NoAntipode(f"{dsg.name} has no antipode")
    algebra = dsg.algebra
    unit = NCPolynomial.one(algebra)
    identity = lambda q: q  # noqa: E731
    left, right = _Worst(), _Worst()
    for word in algebra.word_basis(degree_cap):
        delta = comultiply(dsg, NCPolynomial.word(algebra, *word), centered=False)
        expected = unit * algebra.counit(word)
        left.update(
            fp_apply_hom([dsg.antipode, identity], delta, unit).max_abs_difference(expected),
            word,
        )
        right.update(
            fp_apply_hom([identity, dsg.antipode], delta, unit).max_abs_difference(expected),
            word,
        )
    report = LawReport(dsg.name, degree_cap)
    report.checks.append(left.entry("antipode-left", tol))
    report.checks.append(right.entry("antipode-right", tol))
    return report


# ============================================================================
# Tensor lift T(ℰ) and the multiplication map
# ============================================================================


def _letter(word: Word) -> str:
    return "[" + " ".join(word) + "]"


def tensor_lift(dsg: DualSemigroup, degree_cap: int) -> DualSemigroup:
    """T(ℰ) over the kernel basis words of ``dsg`` up to ``degree_cap``.

    T(Δ) sends the letter [b] to Δb with each leg replaced by its letter.
    """
    algebra = dsg.algebra
    words = algebra.word_basis(degree_cap)
    letters = {_letter(w): w for w in words}
    generators = tuple(
        GeneratorSymbol(_letter(w), _letter(algebra.adjoint_word(w)), algebra.degree(w))
        for w in words
    )
    lifted = AlgebraPresentation(name=f"T({algebra.name}|{degree_cap})", generators=generators)
    pair = (lifted, lifted)
    delta: dict[str, FreeProductElement] = {}
    for w in words:
        terms: dict[Any, complex] = {}
        for alternating, coeff in comultiply(dsg, centered_polynomial(algebra, w)).items():
            legs = []
            for k, leg in alternating:
                name = _letter(leg)
                if name not in letters:
                    raise ClosureCapExceeded(
                        f"leg {leg} of Δ{w} is not a kernel basis word up to degree {degree_cap}"
                    )
                legs.append((k, (name,)))
            terms[tuple(legs)] = coeff
        delta[_letter(w)] = FreeProductElement(pair, terms, centered=False)
    _LOGGER.debug("Tensor lift of %s at degree %d has %d letters", dsg.name, degree_cap, len(words))
    return DualSemigroup(
        f"lift({dsg.name},{degree_cap})",
        lifted,
        delta,
        lifted_from=dsg,
        letter_words=letters,
    )


def multiplication_map(lift: DualSemigroup) -> Callable[[NCPolynomial], NCPolynomial]:
    """M: T(ℰ) → ℰ̃, [b₁]⋯[b_k] ↦ b₁⋯b_k with each bᵢ centered."""
    if lift.lifted_from is None:
        raise ConfigError(f"{lift.name} is not a tensor lift")
    base = lift.lifted_from.algebra

    def apply(p: NCPolynomial) -> NCPolynomial:
        if p.algebra is not lift.algebra:
            raise AlgebraMismatch(f"M is defined on {lift.algebra.name}, got {p.algebra.name}")
        result = NCPolynomial.zero(base)
        for word, coeff in p.items():
            term = NCPolynomial.one(base) * coeff
            for letter in word:
                term = term * centered_polynomial(base, lift.letter_words[letter])
            result = result + term
        return result

    return apply


__all__ = [
    "DualSemigroup",
    "LawCheck",
    "LawReport",
    "antipode_check",
    "check_dualsg_laws",
    "comultiply",
    "free_group_dual_semigroup",
    "get_dual_semigroup",
    "iterate_delta",
    "multiplication_map",
    "primitive_dual_semigroup",
    "tensor_lift",
    "unitary_dual_semigroup",
    "user_dual_semigroup",
]
