"""Lévy-process level checks on finite time grids.

A joint word for a grid σ = {t₁ < ⋯ < t_{n+1}} is a kernel-picture
free-product element over n copies of ℬ, copy l standing for the
increment (t_l, t_{l+1}). Its expectation is the n-fold universal product
of the increment exponentials φ_{t_{l+1} − t_l}.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from itertools import product as cartesian
from typing import Any

import numpy as np

from dualconv.algebra import (
    FreeProductElement,
    LinearFunctional,
    NCPolynomial,
    Word,
    fp_apply_hom,
)
from dualconv.convolution import ExponentialSemigroup, star
from dualconv.dualsg import DualSemigroup, iterate_delta
from dualconv.exceptions import GridMismatch, TruncationTooSmall
from dualconv.positivity import GNSData, StateReport, check_conditionally_positive, check_state
from dualconv.products import ProductKind, fold_product
from dualconv_config import DEFAULTS

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing non-negative times t₁ < ⋯ < t_{n+1}, n ≥ 1."""

    times: tuple[float, ...]

    def __post_init__(self) -> None:
        times = tuple(float(t) for t in self.times)
        object.__setattr__(self, "times", times)
        if len(times) < 2:
            raise ValueError(f"a time grid needs at least two points, got {times}")
        if times[0] < 0:
            raise ValueError(f"time grid starts below zero: {times}")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError(f"time grid is not strictly increasing: {times}")

    @property
    def increments(self) -> tuple[float, ...]:
        return tuple(b - a for a, b in zip(self.times, self.times[1:]))

    def __len__(self) -> int:
        """Number of increments."""
        return len(self.times) - 1

    def shifted(self, shift: float) -> TimeGrid:
        return TimeGrid(tuple(t + shift for t in self.times))

    def position(self, t: float) -> int | None:
        for i, s in enumerate(self.times):
            if math.isclose(s, t, rel_tol=1e-12, abs_tol=1e-12):
                return i
        return None

    def is_refined_by(self, other: TimeGrid) -> bool:
        return all(other.position(t) is not None for t in self.times)


def _semigroup(
    kind: ProductKind,
    dsg: DualSemigroup,
    psi: LinearFunctional,
    semigroup: ExponentialSemigroup | None,
) -> ExponentialSemigroup:
    if semigroup is not None:
        return semigroup
    return ExponentialSemigroup(kind, dsg, psi)


# ============================================================================
# Schoenberg correspondence
# ============================================================================


@dataclass
class SchoenbergPoint:
    t: float
    margin: float
    passed: bool
    hermitian_residual: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "t": self.t,
            "margin": self.margin,
            "passed": self.passed,
            "hermitian_residual": self.hermitian_residual,
        }


@dataclass
class SchoenbergReport:
    kind: ProductKind
    dual_semigroup: str
    degree_cap: int
    tolerance: float
    stage: str
    conditionally_positive: StateReport
    points: list[SchoenbergPoint] = field(default_factory=list)
    semigroup_residuals: list[tuple[float, float, float]] = field(default_factory=list)
    continuity: float | None = None

    @property
    def passed(self) -> bool:
        return (
            self.stage == "complete"
            and self.conditionally_positive.passed
            and all(point.passed for point in self.points)
        )

    @property
    def min_margin(self) -> float:
        return min((point.margin for point in self.points), default=0.0)

    @property
    def max_semigroup_residual(self) -> float:
        return max((r for _, _, r in self.semigroup_residuals), default=0.0)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "dual_semigroup": self.dual_semigroup,
            "degree_cap": self.degree_cap,
            "tolerance": self.tolerance,
            "stage": self.stage,
            "passed": self.passed,
            "conditionally_positive": self.conditionally_positive.to_dict(),
            "points": [point.to_dict() for point in self.points],
            "min_margin": self.min_margin,
            "semigroup_residuals": [
                {"s": s, "t": t, "residual": r} for s, t, r in self.semigroup_residuals
            ],
            "continuity": self.continuity,
        }


def semigroup_residual(
    kind: ProductKind,
    dsg: DualSemigroup,
    semigroup: ExponentialSemigroup,
    s: float,
    t: float,
    degree_cap: int,
) -> float:
    """max |(φ_s ⋆ φ_t)(w) − φ_{s+t}(w)| over kernel words up to the cap."""
    convolved = star(kind, dsg, semigroup.functional(s), semigroup.functional(t))
    combined = semigroup.functional(s + t)
    return max(
        (
            abs(convolved.value(w) - combined.value(w))
            for w in dsg.algebra.word_basis(degree_cap)
        ),
        default=0.0,
    )


def schoenberg_verify(
    kind: ProductKind,
    dsg: DualSemigroup,
    psi: LinearFunctional,
    t_grid: Sequence[float],
    degree_cap: int = DEFAULTS["degree_cap"],
    tol: float = DEFAULTS["psd_tolerance"],
) -> SchoenbergReport:
    """ψ conditionally positive ⇒ every φ_t = exp⋆(tψ) on the grid is a state."""
    kind = ProductKind(kind)
    cp = check_conditionally_positive(psi, degree_cap, tol)
    report = SchoenbergReport(kind, dsg.name, degree_cap, tol, "precondition", cp)
    if not cp.passed:
        _LOGGER.info(
            "Schoenberg check of %s stops at the precondition: min eigenvalue %.3g",
            psi.label or "ψ",
            cp.min_eigenvalue,
        )
        return report

    semigroup = ExponentialSemigroup(kind, dsg, psi)
    times = sorted(float(t) for t in t_grid)
    for t in times:
        state = check_state(semigroup.functional(t), degree_cap, tol)
        report.points.append(
            SchoenbergPoint(t, state.min_eigenvalue, state.passed, state.hermitian.residual)
        )
    for s, t in zip(times, times[1:]):
        report.semigroup_residuals.append(
            (s, t, semigroup_residual(kind, dsg, semigroup, s, t, degree_cap))
        )
    if times:
        smallest = semigroup.functional(times[0])
        report.continuity = max(
            (abs(smallest.value(w)) for w in dsg.algebra.word_basis(degree_cap)),
            default=0.0,
        )
    report.stage = "complete"
    _LOGGER.debug(
        "Schoenberg %s on %s: min margin %.3g, semigroup residual %.2e",
        kind.value,
        dsg.name,
        report.min_margin,
        report.max_semigroup_residual,
    )
    return report


# ============================================================================
# Joint increments and refinement
# ============================================================================


def joint_functional(
    kind: ProductKind,
    dsg: DualSemigroup,
    psi: LinearFunctional,
    sigma: TimeGrid,
    w: FreeProductElement,
    semigroup: ExponentialSemigroup | None = None,
) -> complex:
    """φ_σ(w): the product of the increment exponentials."""
    if len(w.components) != len(sigma):
        raise GridMismatch(
            f"joint word over {len(w.components)} copies for a grid with "
            f"{len(sigma)} increments"
        )
    semigroup = _semigroup(kind, dsg, psi, semigroup)
    functionals = [semigroup.functional(dt) for dt in sigma.increments]
    return fold_product(kind, functionals, w)


def refinement_map(
    dsg: DualSemigroup, sigma: TimeGrid, tau: TimeGrid
) -> Callable[[FreeProductElement], FreeProductElement]:
    """f_στ: each σ-increment is split by Δ_m over the τ-increments inside it."""
    if not sigma.is_refined_by(tau):
        raise GridMismatch(f"{sigma.times} is not a sub-grid of {tau.times}")
    positions = [tau.position(t) for t in sigma.times]
    source = (dsg.algebra,) * len(sigma)
    target = (dsg.algebra,) * len(tau)

    def split(l: int) -> Callable[[NCPolynomial], FreeProductElement]:
        start, stop = positions[l], positions[l + 1]
        assert start is not None and stop is not None
        pieces = stop - start
        mapping = {i: start + i for i in range(pieces)}
        return lambda p: iterate_delta(dsg, pieces, p).relabel(mapping, target)

    maps = [split(l) for l in range(len(sigma))]

    def apply(w: FreeProductElement) -> FreeProductElement:
        if tuple(w.components) != source:
            raise GridMismatch(
                f"joint word over {len(w.components)} copies, grid has {len(sigma)}"
            )
        if not w.centered:
            w = w.to_centered()
        return fp_apply_hom(maps, w, FreeProductElement.one(target, centered=True))

    return apply


@dataclass
class RefinementResult:
    residual: float
    composition_residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance and self.composition_residual <= self.tolerance

    def to_dict(self) -> dict[str, Any]:
        return {
            "residual": self.residual,
            "composition_residual": self.composition_residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def refinement_check(
    kind: ProductKind,
    dsg: DualSemigroup,
    psi: LinearFunctional,
    sigma: TimeGrid,
    tau: TimeGrid,
    w: FreeProductElement,
    upsilon: TimeGrid | None = None,
    tol: float = DEFAULTS["semigroup_tolerance"],
    semigroup: ExponentialSemigroup | None = None,
) -> RefinementResult:
    """|φ_τ(f_στ(w)) − φ_σ(w)|, plus f_τυ∘f_στ = f_συ when υ is given."""
    semigroup = _semigroup(kind, dsg, psi, semigroup)
    refined = refinement_map(dsg, sigma, tau)(w)
    residual = abs(
        joint_functional(kind, dsg, psi, tau, refined, semigroup)
        - joint_functional(kind, dsg, psi, sigma, w, semigroup)
    )
    composition = 0.0
    if upsilon is not None:
        twice = refinement_map(dsg, tau, upsilon)(refined)
        once = refinement_map(dsg, sigma, upsilon)(w)
        composition = twice.max_abs_difference(once)
    return RefinementResult(residual, composition, tol)


def random_refinement(
    rng: np.random.Generator, dsg: DualSemigroup, max_degree: int = 3
) -> tuple[TimeGrid, TimeGrid, TimeGrid, FreeProductElement]:
    """σ ⊂ τ ⊂ υ with one new point per refinement, and a random joint word on σ."""
    points: list[float] = []
    while len(points) < 2:
        points = sorted({round(float(t), 3) for t in rng.uniform(0.0, 2.0, size=3)})
    grids = [TimeGrid(tuple(points))]
    for _ in range(2):
        times = grids[-1].times
        gap = int(rng.integers(0, len(times) - 1))
        midpoint = times[gap] + (times[gap + 1] - times[gap]) * float(rng.uniform(0.25, 0.75))
        grids.append(TimeGrid(tuple(sorted(times + (midpoint,)))))
    n = len(grids[0])
    names = [g.name for g in dsg.algebra.generators]
    legs: list[tuple[int, Word]] = []
    budget = int(rng.integers(1, max_degree + 1))
    while budget > 0:
        choices = [k for k in range(n) if not legs or legs[-1][0] != k]
        if not choices:
            break
        k = int(rng.choice(choices))
        m = int(rng.integers(1, budget + 1))
        legs.append((k, tuple(str(rng.choice(names)) for _ in range(m))))
        budget -= m
    word = FreeProductElement.word((dsg.algebra,) * n, legs, centered=True)
    return grids[0], grids[1], grids[2], word


def stationarity_residual(
    kind: ProductKind,
    dsg: DualSemigroup,
    psi: LinearFunctional,
    sigma: TimeGrid,
    shift: float,
    w: FreeProductElement,
    semigroup: ExponentialSemigroup | None = None,
) -> float:
    """|φ_σ(w) − φ_{σ+shift}(w)|: increments only see their lengths."""
    semigroup = _semigroup(kind, dsg, psi, semigroup)
    return abs(
        joint_functional(kind, dsg, psi, sigma, w, semigroup)
        - joint_functional(kind, dsg, psi, sigma.shifted(shift), w, semigroup)
    )


@dataclass
class ContinuityReport:
    times: list[float]
    values: list[float]
    bound: float

    @property
    def passed(self) -> bool:
        monotone = all(b <= a + 1e-12 for a, b in zip(self.values, self.values[1:]))
        return monotone and (not self.values or self.values[-1] <= self.bound)

    def to_dict(self) -> dict[str, Any]:
        return {
            "times": self.times,
            "values": self.values,
            "bound": self.bound,
            "passed": self.passed,
        }


def weak_continuity(
    kind: ProductKind,
    dsg: DualSemigroup,
    psi: LinearFunctional,
    b: NCPolynomial,
    ts: Iterable[float],
    semigroup: ExponentialSemigroup | None = None,
) -> ContinuityReport:
    """|φ_t(b)| along a decreasing sequence of times."""
    semigroup = _semigroup(kind, dsg, psi, semigroup)
    times = sorted((float(t) for t in ts), reverse=True)
    values = [abs(semigroup.value(t, b)) for t in times]
    scale = max(1.0, abs(sum((c * psi.centered_value(w) for w, c in b.items() if w), 0j)))
    bound = math.sqrt(times[-1]) * scale if times else 0.0
    return ContinuityReport(times, values, bound)


# ============================================================================
# Fock space realizations
# ============================================================================


@dataclass
class FockSpec:
    """Generator data of the Fock realization on a truncated Fock space.

    A generator g acts as A*(√t η(g)) + Λ(ρ(g)) + A(√t η(g*)) + tψ(g) + δ(g)·I
    with ρ the kernel representation, so vacuum moments are the unital
    values φ_t(w) = φ_t(w − δ(w)𝟏) + δ(w).
    """

    flavor: str
    h_dim: int
    truncation: int
    rho: dict[str, np.ndarray]
    eta: dict[str, np.ndarray]
    psi: dict[str, complex]
    adjoints: dict[str, str]
    counit: dict[str, complex] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.flavor not in ("bose", "full"):
            raise ValueError(f"Fock flavor must be 'bose' or 'full', got {self.flavor!r}")
        if self.truncation < 0:
            raise ValueError(f"truncation must be >= 0, got {self.truncation}")


def fock_spec_from_gns(gns: GNSData, flavor: str, truncation: int) -> FockSpec:
    return FockSpec(
        flavor,
        gns.dimension,
        truncation,
        dict(gns.rho),
        dict(gns.eta),
        dict(gns.psi),
        {g.name: g.adjoint_name for g in gns.algebra.generators},
        {g.name: gns.algebra.counit((g.name,)) for g in gns.algebra.generators},
    )


class _FockSpace:
    """Dense creation, annihilation and preservation operators."""

    def __init__(self, flavor: str, h_dim: int, truncation: int) -> None:
        self.flavor = flavor
        self.h_dim = h_dim
        if flavor == "bose":
            states = [
                n
                for n in cartesian(range(truncation + 1), repeat=h_dim)
                if sum(n) <= truncation
            ]
            states.sort(key=lambda n: (sum(n), n))
        else:
            states = [
                s
                for k in range(truncation + 1)
                for s in cartesian(range(h_dim), repeat=k)
            ]
        self.states: list[tuple[int, ...]] = states
        self.index = {s: i for i, s in enumerate(states)}
        self.dimension = len(states)
        self._creation = [self._build_creation(i) for i in range(h_dim)]

    def _build_creation(self, i: int) -> np.ndarray:
        matrix = np.zeros((self.dimension, self.dimension), dtype=complex)
        for column, state in enumerate(self.states):
            if self.flavor == "bose":
                raised = tuple(n + (1 if j == i else 0) for j, n in enumerate(state))
                factor = math.sqrt(state[i] + 1)
            else:
                raised = (i,) + state
                factor = 1.0
            row = self.index.get(raised)
            if row is not None:
                matrix[row, column] = factor
        return matrix

    def creation(self, vector: np.ndarray) -> np.ndarray:
        result = np.zeros((self.dimension, self.dimension), dtype=complex)
        for i, c in enumerate(vector):
            if c:
                result += c * self._creation[i]
        return result

    def preservation(self, operator: np.ndarray) -> np.ndarray:
        if self.flavor == "bose":
            result = np.zeros((self.dimension, self.dimension), dtype=complex)
            for i in range(self.h_dim):
                for j in range(self.h_dim):
                    if operator[i, j]:
                        result += operator[i, j] * self._creation[i] @ self._creation[j].conj().T
            return result
        # full Fock space: T acts on the first tensor factor
        result = np.zeros((self.dimension, self.dimension), dtype=complex)
        for column, state in enumerate(self.states):
            if not state:
                continue
            for j in range(self.h_dim):
                if operator[j, state[0]]:
                    result[self.index[(j,) + state[1:]], column] += operator[j, state[0]]
        return result


def fock_moment(spec: FockSpec, word: Word, t: float) -> complex:
    """⟨Ω, π_t(v₁)⋯π_t(v_n) Ω⟩ on the truncated Fock space."""
    if len(word) > spec.truncation:
        raise TruncationTooSmall(
            f"word of length {len(word)} needs truncation >= {len(word)}, "
            f"spec has {spec.truncation}"
        )
    space = _FockSpace(spec.flavor, spec.h_dim, spec.truncation)
    scale = math.sqrt(t)
    operators: dict[str, np.ndarray] = {}
    for letter in set(word):
        eta = np.asarray(spec.eta[letter], dtype=complex)
        eta_adjoint = np.asarray(spec.eta[spec.adjoints[letter]], dtype=complex)
        rho = np.asarray(spec.rho[letter], dtype=complex)
        operators[letter] = (
            space.creation(scale * eta)
            + space.preservation(rho)
            + space.creation(scale * eta_adjoint).conj().T
            + (t * spec.psi[letter] + spec.counit.get(letter, 0)) * np.eye(space.dimension)
        )
    vector = np.zeros(space.dimension, dtype=complex)
    vector[0] = 1.0
    for letter in reversed(word):
        vector = operators[letter] @ vector
    return complex(vector[0])


__all__ = [
    "ContinuityReport",
    "FockSpec",
    "RefinementResult",
    "SchoenbergPoint",
    "SchoenbergReport",
    "TimeGrid",
    "fock_moment",
    "fock_spec_from_gns",
    "joint_functional",
    "random_refinement",
    "refinement_check",
    "refinement_map",
    "schoenberg_verify",
    "semigroup_residual",
    "stationarity_residual",
    "weak_continuity",
]
