"""Presented *-algebras, noncommutative polynomials and free products.

A word is a tuple of generator names; the empty word stands for the unit
𝟏. Every presentation carries an augmentation character δ (the counit of
the dual semigroups built on it, zero on the generators of a tensor
algebra), so each algebra is seen in two pictures:

- unital picture: elements of ℂ𝟏 ⊕ ℬ, words are taken as they are;
- kernel picture: elements of ℬ = kern δ, a nonempty word ``w`` denotes
  the centered element ``w − δ(w)𝟏``.

Free products follow the same split: a ``FreeProductElement`` built with
``centered=False`` has legs that are raw words and fusion of two legs may
produce a scalar (absorbed into the coefficient, neighbours re-fused);
with ``centered=True`` legs are centered words and fusion stays inside
the kernel.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from collections.abc import Callable, Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Union

from dualconv.exceptions import (
    AlgebraMismatch,
    BadComponentIndex,
    ComponentFamilyMismatch,
    NonTerminatingRewrite,
    TargetMismatch,
)
from dualconv_config import DEFAULTS

_LOGGER = logging.getLogger(__name__)

Word = tuple[str, ...]
Leg = tuple[int, Word]
AlternatingWord = tuple[Leg, ...]
Scalar = Union[complex, float, int]

ONE: Word = ()

DROP_TOLERANCE: float = DEFAULTS["drop_tolerance"]


def _clean(terms: Mapping[Any, complex]) -> dict[Any, complex]:
    return {key: complex(c) for key, c in terms.items() if abs(c) > DROP_TOLERANCE}


# ---------------------------------------------------------------------------
# Presentations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GeneratorSymbol:
    """A generator together with the name of its *-partner."""

    name: str
    adjoint_name: str
    degree: int = 1


@dataclass(frozen=True)
class RewriteRule:
    """Reducible pattern ``lhs`` replaced by the linear combination ``rhs``."""

    lhs: Word
    rhs: tuple[tuple[Word, complex], ...]


@dataclass(frozen=True, eq=False)
class AlgebraPresentation:
    """A *-algebra given by generators, involution and a rewriting system.

    Instances compare by identity; the built-in constructors are cached so
    that two requests for the same algebra return the same object.
    """

    name: str
    generators: tuple[GeneratorSymbol, ...]
    rules: tuple[RewriteRule, ...] = ()
    unital: bool = False
    augmentation: Mapping[str, complex] = field(default_factory=dict)
    step_cap: int = DEFAULTS["rewrite_step_cap"]
    _normal_forms: dict[Word, dict[Word, complex]] = field(
        default_factory=dict, init=False, repr=False
    )

    def __post_init__(self) -> None:
        names = [g.name for g in self.generators]
        if len(set(names)) != len(names):
            raise ValueError(f"{self.name}: duplicate generator names {names}")
        for g in self.generators:
            partner = self.symbol(g.adjoint_name)
            if partner.adjoint_name != g.name:
                raise ValueError(
                    f"{self.name}: adjoint of {g.name!r} is not an involution"
                )
        for rule in self.rules:
            self._check_rule(rule)
        patterns = {rule.lhs for rule in self.rules}
        for rule in self.rules:
            if self.adjoint_word(rule.lhs) not in patterns:
                raise ValueError(
                    f"{self.name}: relations are not *-closed, no rule for "
                    f"the adjoint of {rule.lhs}"
                )

    # -- lookups -----------------------------------------------------------

    @cached_property
    def _symbols(self) -> dict[str, GeneratorSymbol]:
        return {g.name: g for g in self.generators}

    @cached_property
    def _order(self) -> dict[str, int]:
        return {g.name: i for i, g in enumerate(self.generators)}

    @cached_property
    def _rules_by_first_letter(self) -> dict[str, list[RewriteRule]]:
        index: dict[str, list[RewriteRule]] = defaultdict(list)
        for rule in self.rules:
            index[rule.lhs[0]].append(rule)
        return dict(index)

    def symbol(self, name: str) -> GeneratorSymbol:
        try:
            return self._symbols[name]
        except KeyError:
            raise AlgebraMismatch(
                f"{name!r} is not a generator of {self.name}"
            ) from None

    def adjoint_word(self, word: Word) -> Word:
        return tuple(self.symbol(letter).adjoint_name for letter in reversed(word))

    def degree(self, word: Word) -> int:
        return sum(self.symbol(letter).degree for letter in word)

    def counit(self, word: Word) -> complex:
        """Augmentation δ(w), a multiplicative character with δ(𝟏) = 1."""
        value = 1 + 0j
        for letter in word:
            value *= self.augmentation.get(letter, 0)
            if value == 0:
                break
        return value

    def order_key(self, word: Word) -> tuple[int, tuple[int, ...]]:
        return self.degree(word), tuple(self._order[letter] for letter in word)

    # -- rewriting ---------------------------------------------------------

    def _check_rule(self, rule: RewriteRule) -> None:
        if not rule.lhs:
            raise ValueError(f"{self.name}: rewrite rule with empty pattern")
        lhs_key = self.order_key(rule.lhs)
        for word, _ in rule.rhs:
            if word == ONE and not self.unital:
                raise ValueError(f"{self.name}: rule {rule.lhs} produces 𝟏")
            if not self.order_key(word) < lhs_key:
                raise ValueError(
                    f"{self.name}: rule {rule.lhs} -> {word} does not decrease "
                    "(degree, lex) order"
                )

    def _find_redex(self, word: Word) -> tuple[int, RewriteRule] | None:
        for i, letter in enumerate(word):
            for rule in self._rules_by_first_letter.get(letter, ()):
                if word[i : i + len(rule.lhs)] == rule.lhs:
                    return i, rule
        return None

    def is_normal(self, word: Word) -> bool:
        return self._find_redex(word) is None

    def normal_form(self, word: Word) -> dict[Word, complex]:
        """Normal form of ``word`` as a term map (memoized, read-only)."""
        for letter in word:
            self.symbol(letter)
        return self._normal_form(word, 0)

    def _normal_form(self, word: Word, depth: int) -> dict[Word, complex]:
        cached = self._normal_forms.get(word)
        if cached is not None:
            return cached
        if depth > self.step_cap:
            raise NonTerminatingRewrite(
                f"{self.name}: more than {self.step_cap} rewrite steps on {word}"
            )
        redex = self._find_redex(word)
        if redex is None:
            result = {word: 1 + 0j}
        else:
            i, rule = redex
            prefix, suffix = word[:i], word[i + len(rule.lhs) :]
            acc: dict[Word, complex] = defaultdict(complex)
            for replacement, coeff in rule.rhs:
                reduced = self._normal_form(prefix + replacement + suffix, depth + 1)
                for w, c in reduced.items():
                    acc[w] += coeff * c
            result = _clean(acc)
        self._normal_forms.setdefault(word, result)
        return result

    def word_basis(self, degree_cap: int) -> list[Word]:
        """Nonempty normal-form words of degree at most ``degree_cap``."""
        basis: list[Word] = []
        frontier: list[Word] = [ONE]
        while frontier:
            grown: list[Word] = []
            for word in frontier:
                for g in self.generators:
                    candidate = word + (g.name,)
                    if self.degree(candidate) <= degree_cap and self.is_normal(
                        candidate
                    ):
                        grown.append(candidate)
            basis.extend(grown)
            frontier = grown
        return sorted(basis, key=self.order_key)


def normalize(algebra: AlgebraPresentation, word: Word) -> NCPolynomial:
    """Normal form of ``word`` modulo the relation ideal of ``algebra``."""
    return NCPolynomial(algebra, algebra.normal_form(tuple(word)), normalized=True)


# ---------------------------------------------------------------------------
# Built-in presentations
# ---------------------------------------------------------------------------

_PRESENTATIONS: dict[tuple[str, Any], AlgebraPresentation] = {}


def _cached(key: tuple[str, Any], build: Callable[[], AlgebraPresentation]):
    if key not in _PRESENTATIONS:
        _PRESENTATIONS[key] = build()
    return _PRESENTATIONS[key]


def free_algebra(names: Sequence[str] = ("x",)) -> AlgebraPresentation:
    """Tensor algebra T(𝒱) over self-adjoint generators, non-unital."""
    names = tuple(names)

    def build() -> AlgebraPresentation:
        return AlgebraPresentation(
            name=f"T({','.join(names)})",
            generators=tuple(GeneratorSymbol(n, n) for n in names),
        )

    return _cached(("free", names), build)


def unitary_generator_names(d: int) -> list[tuple[int, int, str, str]]:
    """``(k, l, name, adjoint_name)`` for the entries of K⟨d⟩, 1-based."""
    if d == 1:
        return [(1, 1, "x", "x*")]
    return [
        (k, l, f"x{k}{l}", f"x{k}{l}*") for k in range(1, d + 1) for l in range(1, d + 1)
    ]


def unitary_algebra(d: int) -> AlgebraPresentation:
    """K⟨d⟩: entries of a d×d unitary, relations x*x = 𝟏 = xx*.

    Rules eliminate x*_{dk}x_{dl} and x_{kd}x*_{ld}; generators are ordered
    row by row so every replacement is lexicographically smaller.
    """
    if d < 1:
        raise ValueError(f"unitary algebra needs d >= 1, got {d}")

    def build() -> AlgebraPresentation:
        entries = unitary_generator_names(d)
        name = {(k, l): n for k, l, n, _ in entries}
        star = {(k, l): a for k, l, _, a in entries}
        generators: list[GeneratorSymbol] = []
        for k, l, n, a in entries:
            generators.extend([GeneratorSymbol(n, a), GeneratorSymbol(a, n)])
        rules: list[RewriteRule] = []
        for k in range(1, d + 1):
            for l in range(1, d + 1):
                unit = ((ONE, 1 + 0j),) if k == l else ()
                rules.append(
                    RewriteRule(
                        (star[d, k], name[d, l]),
                        unit
                        + tuple(((star[n, k], name[n, l]), -1 + 0j) for n in range(1, d)),
                    )
                )
                rules.append(
                    RewriteRule(
                        (name[k, d], star[l, d]),
                        unit
                        + tuple(((name[k, n], star[l, n]), -1 + 0j) for n in range(1, d)),
                    )
                )
        augmentation: dict[str, complex] = {}
        for k, l, n, a in entries:
            augmentation[n] = augmentation[a] = 1.0 if k == l else 0.0
        return AlgebraPresentation(
            name=f"K<{d}>",
            generators=tuple(generators),
            rules=tuple(rules),
            unital=True,
            augmentation=augmentation,
        )

    return _cached(("unitary", d), build)


def free_group_names(n: int) -> list[tuple[str, str]]:
    if n == 1:
        return [("g", "g^-1")]
    return [(f"g{i}", f"g{i}^-1") for i in range(1, n + 1)]


def free_group_algebra(n: int) -> AlgebraPresentation:
    """Group algebra ℂF_n with g* = g⁻¹ and δ(g) = 1."""
    if n < 1:
        raise ValueError(f"free group needs n >= 1, got {n}")

    def build() -> AlgebraPresentation:
        generators: list[GeneratorSymbol] = []
        rules: list[RewriteRule] = []
        for g, inverse in free_group_names(n):
            generators.extend([GeneratorSymbol(g, inverse), GeneratorSymbol(inverse, g)])
            rules.append(RewriteRule((g, inverse), ((ONE, 1 + 0j),)))
            rules.append(RewriteRule((inverse, g), ((ONE, 1 + 0j),)))
        return AlgebraPresentation(
            name=f"CF{n}",
            generators=tuple(generators),
            rules=tuple(rules),
            unital=True,
            augmentation={g.name: 1.0 for g in generators},
        )

    return _cached(("freegroup", n), build)


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------


class NCPolynomial:
    """Sparse complex combination of normal-form words of one presentation."""

    __slots__ = ("algebra", "_terms", "_hash")

    def __init__(
        self,
        algebra: AlgebraPresentation,
        terms: Mapping[Word, Scalar] | Iterable[tuple[Word, Scalar]] = (),
        *,
        normalized: bool = False,
    ) -> None:
        self.algebra = algebra
        items = terms.items() if isinstance(terms, Mapping) else terms
        if normalized:
            self._terms = _clean(dict(items))
        else:
            acc: dict[Word, complex] = defaultdict(complex)
            for word, coeff in items:
                for w, c in algebra.normal_form(tuple(word)).items():
                    acc[w] += coeff * c
            self._terms = _clean(acc)
        self._hash: int | None = None

    @classmethod
    def word(cls, algebra: AlgebraPresentation, *letters: str) -> NCPolynomial:
        return cls(algebra, {tuple(letters): 1})

    @classmethod
    def one(cls, algebra: AlgebraPresentation) -> NCPolynomial:
        return cls(algebra, {ONE: 1}, normalized=True)

    @classmethod
    def zero(cls, algebra: AlgebraPresentation) -> NCPolynomial:
        return cls(algebra, {}, normalized=True)

    @property
    def terms(self) -> dict[Word, complex]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[Word, complex]]:
        return iter(self._terms.items())

    def __iter__(self) -> Iterator[tuple[Word, complex]]:
        return self.items()

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def coefficient(self, word: Word) -> complex:
        return self._terms.get(tuple(word), 0j)

    @property
    def scalar_part(self) -> complex:
        return self._terms.get(ONE, 0j)

    @property
    def degree(self) -> int:
        return max((self.algebra.degree(w) for w in self._terms), default=0)

    def counit(self) -> complex:
        return sum((c * self.algebra.counit(w) for w, c in self._terms.items()), 0j)

    def kernel_part(self) -> NCPolynomial:
        """Projection b ↦ b − δ(b)𝟏 onto the counit kernel."""
        return self - self.counit() * NCPolynomial.one(self.algebra)

    def _same_algebra(self, other: NCPolynomial) -> None:
        if other.algebra is not self.algebra:
            raise AlgebraMismatch(
                f"cannot combine {self.algebra.name} with {other.algebra.name}"
            )

    def __add__(self, other: NCPolynomial) -> NCPolynomial:
        if not isinstance(other, NCPolynomial):
            return NotImplemented
        self._same_algebra(other)
        acc = defaultdict(complex, self._terms)
        for w, c in other._terms.items():
            acc[w] += c
        return NCPolynomial(self.algebra, acc, normalized=True)

    def __neg__(self) -> NCPolynomial:
        return NCPolynomial(
            self.algebra, {w: -c for w, c in self._terms.items()}, normalized=True
        )

    def __sub__(self, other: NCPolynomial) -> NCPolynomial:
        if not isinstance(other, NCPolynomial):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other: NCPolynomial | Scalar) -> NCPolynomial:
        if isinstance(other, NCPolynomial):
            return nc_multiply(self, other)
        if isinstance(other, (int, float, complex)):
            return NCPolynomial(
                self.algebra,
                {w: c * other for w, c in self._terms.items()},
                normalized=True,
            )
        return NotImplemented

    def __rmul__(self, other: Scalar) -> NCPolynomial:
        if isinstance(other, (int, float, complex)):
            return self * other
        return NotImplemented

    def adjoint(self) -> NCPolynomial:
        return nc_adjoint(self)

    def max_abs_difference(self, other: NCPolynomial) -> float:
        diff = self - other
        return max((abs(c) for _, c in diff), default=0.0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, NCPolynomial):
            return NotImplemented
        return other.algebra is self.algebra and other._terms == self._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((id(self.algebra), frozenset(self._terms.items())))
        return self._hash

    def __repr__(self) -> str:
        if not self._terms:
            return "0"
        parts = [
            f"({c:.6g})·{'·'.join(w) if w else '𝟏'}"
            for w, c in sorted(self._terms.items(), key=lambda t: self.algebra.order_key(t[0]))
        ]
        return " + ".join(parts)


def nc_multiply(p: NCPolynomial, q: NCPolynomial) -> NCPolynomial:
    """Bilinear product: concatenate words, then normalize."""
    p._same_algebra(q)
    algebra = p.algebra
    acc: dict[Word, complex] = defaultdict(complex)
    for u, a in p.items():
        for v, b in q.items():
            for w, c in algebra.normal_form(u + v).items():
                acc[w] += a * b * c
    return NCPolynomial(algebra, acc, normalized=True)


def nc_adjoint(p: NCPolynomial) -> NCPolynomial:
    """Anti-linear involution reversing words letter by letter."""
    algebra = p.algebra
    return NCPolynomial(
        algebra,
        [(algebra.adjoint_word(w), c.conjugate()) for w, c in p.items()],
    )


def centered_polynomial(algebra: AlgebraPresentation, word: Word) -> NCPolynomial:
    """The kernel element ``w − δ(w)𝟏`` denoted by a centered word."""
    word = tuple(word)
    terms = {word: 1 + 0j}
    delta = algebra.counit(word)
    if word and delta:
        terms[ONE] = -delta
    return NCPolynomial(algebra, terms, normalized=True)


# ---------------------------------------------------------------------------
# Free products
# ---------------------------------------------------------------------------


class FreeProductElement:
    """Linear combination of alternating words over a component family.

    The empty alternating word is the unit; its coefficient is the scalar
    part. ``centered`` selects how legs are read (see the module docstring).
    """

    __slots__ = ("components", "centered", "_terms", "_hash")

    def __init__(
        self,
        components: Sequence[AlgebraPresentation],
        terms: Mapping[AlternatingWord, Scalar] = (),
        *,
        centered: bool = True,
    ) -> None:
        self.components = tuple(components)
        self.centered = centered
        items = dict(terms)
        for word in items:
            self._check_word(word)
        self._terms = _clean(items)
        self._hash: int | None = None

    def _check_word(self, word: AlternatingWord) -> None:
        previous = None
        for k, leg in word:
            if not 0 <= k < len(self.components):
                raise BadComponentIndex(
                    f"component {k} outside family of {len(self.components)}"
                )
            if k == previous:
                raise ValueError(f"adjacent legs share component {k}: {word}")
            if not leg:
                raise ValueError(f"empty leg in alternating word {word}")
            previous = k

    @classmethod
    def one(
        cls, components: Sequence[AlgebraPresentation], *, centered: bool = True
    ) -> FreeProductElement:
        return cls(components, {(): 1}, centered=centered)

    @classmethod
    def zero(
        cls, components: Sequence[AlgebraPresentation], *, centered: bool = True
    ) -> FreeProductElement:
        return cls(components, {}, centered=centered)

    @classmethod
    def word(
        cls,
        components: Sequence[AlgebraPresentation],
        legs: Sequence[tuple[int, Sequence[str]]],
        *,
        centered: bool = True,
    ) -> FreeProductElement:
        """Single alternating word; adjacent same-component legs are fused.

        Legs are read in the element's picture: in the kernel picture a leg
        ``w`` is the centered element ``w − δ(w)𝟏``.
        """
        result = cls.one(components, centered=centered)
        for k, leg in legs:
            if not 0 <= k < len(components):
                raise BadComponentIndex(
                    f"component {k} outside family of {len(components)}"
                )
            polynomial = normalize(components[k], tuple(leg))
            if centered:
                factor = cls(
                    components,
                    {((k, w),): c for w, c in polynomial.items() if w},
                    centered=True,
                )
            else:
                factor = fp_embed(k, polynomial, components, centered=False)
            result = result * factor
        return result

    @property
    def terms(self) -> dict[AlternatingWord, complex]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[AlternatingWord, complex]]:
        return iter(self._terms.items())

    def __iter__(self) -> Iterator[tuple[AlternatingWord, complex]]:
        return self.items()

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def coefficient(self, word: AlternatingWord) -> complex:
        return self._terms.get(tuple(word), 0j)

    @property
    def scalar_part(self) -> complex:
        return self._terms.get((), 0j)

    def without_scalar(self) -> FreeProductElement:
        return self._like({w: c for w, c in self._terms.items() if w})

    def leg_polynomial(self, k: int, word: Word) -> NCPolynomial:
        algebra = self.components[k]
        if self.centered:
            return centered_polynomial(algebra, word)
        return NCPolynomial(algebra, {word: 1}, normalized=True)

    def _like(self, terms: Mapping[AlternatingWord, complex]) -> FreeProductElement:
        element = FreeProductElement.__new__(FreeProductElement)
        element.components = self.components
        element.centered = self.centered
        element._terms = _clean(terms)
        element._hash = None
        return element

    def _same_family(self, other: FreeProductElement) -> None:
        if (
            len(other.components) != len(self.components)
            or any(a is not b for a, b in zip(self.components, other.components))
            or other.centered != self.centered
        ):
            raise ComponentFamilyMismatch(
                "free-product operands use different component families"
            )

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other: FreeProductElement) -> FreeProductElement:
        if not isinstance(other, FreeProductElement):
            return NotImplemented
        self._same_family(other)
        acc = defaultdict(complex, self._terms)
        for w, c in other._terms.items():
            acc[w] += c
        return self._like(acc)

    def __neg__(self) -> FreeProductElement:
        return self._like({w: -c for w, c in self._terms.items()})

    def __sub__(self, other: FreeProductElement) -> FreeProductElement:
        if not isinstance(other, FreeProductElement):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other: FreeProductElement | Scalar) -> FreeProductElement:
        if isinstance(other, FreeProductElement):
            return fp_multiply(self, other)
        if isinstance(other, (int, float, complex)):
            return self._like({w: c * other for w, c in self._terms.items()})
        return NotImplemented

    def __rmul__(self, other: Scalar) -> FreeProductElement:
        if isinstance(other, (int, float, complex)):
            return self * other
        return NotImplemented

    def _fuse(self, k: int, left: Word, right: Word) -> tuple[complex, dict[Word, complex]]:
        """Product of two legs of component ``k``: (scalar part, word part)."""
        algebra = self.components[k]
        product = algebra.normal_form(left + right)
        if not self.centered:
            return product.get(ONE, 0j), {w: c for w, c in product.items() if w}
        # (u − δu)(v − δv) = uv − δ(u)v − δ(v)u + δ(u)δ(v)𝟏, kept without its 𝟏 part
        fused = defaultdict(complex, {w: c for w, c in product.items() if w})
        fused[right] -= algebra.counit(left)
        fused[left] -= algebra.counit(right)
        return 0j, _clean(fused)

    def _concat(
        self, left: AlternatingWord, right: AlternatingWord
    ) -> dict[AlternatingWord, complex]:
        if not left or not right or left[-1][0] != right[0][0]:
            return {left + right: 1 + 0j}
        k = left[-1][0]
        scalar, fused = self._fuse(k, left[-1][1], right[0][1])
        result: dict[AlternatingWord, complex] = defaultdict(complex)
        for w, c in fused.items():
            result[left[:-1] + ((k, w),) + right[1:]] += c
        if scalar:
            for word, c in self._concat(left[:-1], right[1:]).items():
                result[word] += scalar * c
        return result

    def adjoint(self) -> FreeProductElement:
        result = self.zero(self.components, centered=self.centered)
        for word, coeff in self._terms.items():
            term = self.one(self.components, centered=self.centered) * coeff.conjugate()
            for k, leg in reversed(word):
                term = term * fp_embed(
                    k, self.leg_polynomial(k, leg).adjoint(), self.components,
                    centered=self.centered,
                )
            result = result + term
        return result

    def relabel(
        self, mapping: Mapping[int, int], components: Sequence[AlgebraPresentation]
    ) -> FreeProductElement:
        """Move component ``k`` to ``mapping[k]`` in a new family (injective)."""
        terms = {
            tuple((mapping[k], leg) for k, leg in word): c
            for word, c in self._terms.items()
        }
        return FreeProductElement(components, terms, centered=self.centered)

    def to_centered(self) -> FreeProductElement:
        """Rewrite raw legs w as (w − δ(w)𝟏) + δ(w)𝟏 in the kernel picture."""
        if self.centered:
            return self
        return fp_apply_hom(
            [
                lambda p, k=k: fp_embed(k, p, self.components, centered=True)
                for k in range(len(self.components))
            ],
            self,
            FreeProductElement.one(self.components, centered=True),
        )

    def max_abs_difference(self, other: FreeProductElement) -> float:
        return max((abs(c) for _, c in (self - other).items()), default=0.0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FreeProductElement):
            return NotImplemented
        return (
            other.centered == self.centered
            and len(other.components) == len(self.components)
            and all(a is b for a, b in zip(self.components, other.components))
            and other._terms == self._terms
        )

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(
                (
                    tuple(id(a) for a in self.components),
                    self.centered,
                    frozenset(self._terms.items()),
                )
            )
        return self._hash

    def __repr__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for word, c in self._terms.items():
            legs = ",".join(f"({k},{'·'.join(leg)})" for k, leg in word) or "𝟏"
            parts.append(f"({c:.6g})[{legs}]")
        return " + ".join(parts)


def fp_embed(
    k: int,
    p: NCPolynomial,
    components: Sequence[AlgebraPresentation],
    *,
    centered: bool = True,
) -> FreeProductElement:
    """Natural embedding i_k of the k-th component algebra."""
    if not 0 <= k < len(components):
        raise BadComponentIndex(f"component {k} outside family of {len(components)}")
    if p.algebra is not components[k]:
        raise AlgebraMismatch(
            f"{p.algebra.name} is not component {k} ({components[k].name})"
        )
    terms: dict[AlternatingWord, complex] = {
        ((k, w),): c for w, c in p.items() if w
    }
    # in the kernel picture the words carry their centering, so the unit
    # coefficient becomes δ(p)
    scalar = p.counit() if centered else p.scalar_part
    if scalar:
        terms[()] = scalar
    return FreeProductElement(components, terms, centered=centered)


def fp_multiply(u: FreeProductElement, v: FreeProductElement) -> FreeProductElement:
    """Concatenate alternating words, fusing boundary legs of equal component."""
    u._same_family(v)
    acc: dict[AlternatingWord, complex] = defaultdict(complex)
    for left, a in u.items():
        for right, b in v.items():
            for word, c in u._concat(left, right).items():
                acc[word] += a * b * c
    return u._like(acc)


def fp_apply_hom(
    maps: Sequence[Callable[[NCPolynomial], Any]],
    u: FreeProductElement,
    unit: Any,
) -> Any:
    """Apply j_1 ⊔ … ⊔ j_n (or j_1 ⨿ … ⨿ j_n) to ``u``.

    ``maps[k]`` receives each leg of component ``k`` as a polynomial (the
    centered element in the kernel picture) and returns a target element;
    the images are multiplied in leg order. ``unit`` is the target unit.
    """
    if len(maps) != len(u.components):
        raise TargetMismatch(
            f"{len(maps)} homomorphisms for {len(u.components)} components"
        )
    result = unit * 0
    for word, coeff in u.items():
        term = unit * coeff
        for k, leg in word:
            image = maps[k](u.leg_polynomial(k, leg))
            try:
                term = term * image
            except (TypeError, AlgebraMismatch, ComponentFamilyMismatch) as exc:
                raise TargetMismatch(
                    f"image of component {k} does not live in the target"
                ) from exc
            if not term:
                break
        result = result + term
    return result


def swap_components(u: FreeProductElement) -> FreeProductElement:
    """Exchange the tags of a two-component free product element."""
    if len(u.components) != 2:
        raise BadComponentIndex("tag swap needs exactly two components")
    return u.relabel({0: 1, 1: 0}, (u.components[1], u.components[0]))


# ---------------------------------------------------------------------------
# Linear functionals
# ---------------------------------------------------------------------------


class LinearFunctional:
    """Linear functional given by its values on normal-form words.

    ``unit_value`` is the value on 𝟏: 0 for functionals on the counit kernel
    (generators, δ), 1 for normalized states. On kernel elements the value
    does not depend on it. Values are memoized per word.
    """

    def __init__(
        self,
        algebra: AlgebraPresentation,
        rule: Callable[[Word], Scalar],
        *,
        unit_value: Scalar = 0.0,
        hermitian: bool = False,
        label: str = "",
    ) -> None:
        self.algebra = algebra
        self._rule = rule
        self.unit_value = complex(unit_value)
        self.hermitian = hermitian
        self.label = label
        self._memo: dict[Word, complex] = {}

    @classmethod
    def from_table(
        cls,
        algebra: AlgebraPresentation,
        table: Mapping[Word, Scalar],
        *,
        default: Scalar = 0.0,
        unit_value: Scalar = 0.0,
        hermitian: bool = False,
        label: str = "",
    ) -> LinearFunctional:
        values: dict[Word, complex] = defaultdict(complex)
        for word, value in table.items():
            for w, c in algebra.normal_form(tuple(word)).items():
                values[w] += c * value
        values = dict(values)
        if ONE in values:
            unit_value = values.pop(ONE)
        return cls(
            algebra,
            lambda w: values.get(w, default),
            unit_value=unit_value,
            hermitian=hermitian,
            label=label,
        )

    @classmethod
    def zero(cls, algebra: AlgebraPresentation) -> LinearFunctional:
        """δ restricted to ℬ: the unit of the convolution product."""
        return cls(algebra, lambda w: 0.0, hermitian=True, label="delta")

    def value(self, word: Word) -> complex:
        if not word:
            return self.unit_value
        cached = self._memo.get(word)
        if cached is None:
            cached = complex(self._rule(word))
            self._memo.setdefault(word, cached)
        return cached

    def centered_value(self, word: Word) -> complex:
        """Value on the kernel element ``w − δ(w)𝟏``."""
        if not word:
            return 0j
        return self.value(word) - self.algebra.counit(word) * self.unit_value

    def __call__(self, element: NCPolynomial | Word) -> complex:
        if not isinstance(element, NCPolynomial):
            element = normalize(self.algebra, tuple(element))
        if element.algebra is not self.algebra:
            raise AlgebraMismatch(
                f"functional on {self.algebra.name} applied to {element.algebra.name}"
            )
        return sum((c * self.value(w) for w, c in element.items()), 0j)

    def _combine(
        self, other: LinearFunctional, sign: int
    ) -> LinearFunctional:
        if other.algebra is not self.algebra:
            raise AlgebraMismatch("functionals on different algebras")
        return LinearFunctional(
            self.algebra,
            lambda w: self.value(w) + sign * other.value(w),
            unit_value=self.unit_value + sign * other.unit_value,
            hermitian=self.hermitian and other.hermitian,
        )

    def __add__(self, other: LinearFunctional) -> LinearFunctional:
        if not isinstance(other, LinearFunctional):
            return NotImplemented
        return self._combine(other, 1)

    def __sub__(self, other: LinearFunctional) -> LinearFunctional:
        if not isinstance(other, LinearFunctional):
            return NotImplemented
        return self._combine(other, -1)

    def __mul__(self, scalar: Scalar) -> LinearFunctional:
        if not isinstance(scalar, (int, float, complex)):
            return NotImplemented
        return LinearFunctional(
            self.algebra,
            lambda w: scalar * self.value(w),
            unit_value=scalar * self.unit_value,
            hermitian=self.hermitian and complex(scalar).imag == 0,
            label=f"{scalar}*{self.label}" if self.label else "",
        )

    __rmul__ = __mul__

    def __neg__(self) -> LinearFunctional:
        return self * -1

    def compose(
        self,
        hom: Callable[[NCPolynomial], NCPolynomial],
        domain: AlgebraPresentation,
    ) -> LinearFunctional:
        """φ∘j for a homomorphism j from ``domain`` into this algebra."""
        return LinearFunctional(
            domain,
            lambda w: self(hom(NCPolynomial(domain, {w: 1}, normalized=True))),
            unit_value=self.unit_value,
            hermitian=self.hermitian,
        )

    def __repr__(self) -> str:
        label = f" {self.label}" if self.label else ""
        return f"<LinearFunctional{label} on {self.algebra.name}>"
