"""Positivity: moment matrices, conditional positivity and GNS data.

Functionals are read in the kernel picture unless stated otherwise; the
state test works on the normalized extension φ̃ = φ + δ (φ̃(𝟏) = 1), so a
functional that is already unital passes through unchanged.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np
import scipy.linalg

from dualconv.algebra import (
    ONE,
    AlgebraPresentation,
    LinearFunctional,
    NCPolynomial,
    Word,
    centered_polynomial,
    free_group_algebra,
    free_group_names,
    unitary_algebra,
    unitary_generator_names,
)
from dualconv.exceptions import NotConditionallyPositive, RelationInconsistency
from dualconv_config import DEFAULTS

_LOGGER = logging.getLogger(__name__)

PSD_TOLERANCE: float = DEFAULTS["psd_tolerance"]


def normalized_extension(phi: LinearFunctional) -> LinearFunctional:
    """φ̃ on ℂ𝟏 ⊕ ℬ with φ̃(𝟏) = 1 and φ̃(b) = φ(b) on the kernel."""
    algebra = phi.algebra
    return LinearFunctional(
        algebra,
        lambda w: phi.centered_value(w) + algebra.counit(w),
        unit_value=1.0,
        hermitian=phi.hermitian,
        label=f"{phi.label}~" if phi.label else "",
    )


def restrict_to_kernel(phi: LinearFunctional) -> LinearFunctional:
    """The kernel functional b ↦ φ(b − δ(b)𝟏), stored with unit value 0."""
    return LinearFunctional(
        phi.algebra,
        phi.centered_value,
        hermitian=phi.hermitian,
        label=phi.label,
    )


# ============================================================================
# Moment matrices
# ============================================================================


@dataclass
class MomentMatrix:
    """M_ij = φ(a_i* a_j) over a labelled family of elements."""

    basis: list[Word]
    entries: np.ndarray

    @property
    def hermitian_residual(self) -> float:
        if not self.entries.size:
            return 0.0
        return float(np.abs(self.entries - self.entries.conj().T).max())

    @property
    def scale(self) -> float:
        if not self.entries.size:
            return 1.0
        return max(1.0, float(np.abs(self.entries).max()))

    def spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigen-decomposition of the Hermitian part, ascending."""
        symmetric = (self.entries + self.entries.conj().T) / 2
        return scipy.linalg.eigh(symmetric)

    def min_eigenvalue(self) -> float:
        if not self.entries.size:
            return 0.0
        return float(scipy.linalg.eigvalsh((self.entries + self.entries.conj().T) / 2)[0])


def moment_matrix(
    phi: LinearFunctional,
    elements: Sequence[NCPolynomial],
    labels: Sequence[Word] | None = None,
) -> MomentMatrix:
    """Assemble φ(a_i* a_j) for the given elements."""
    adjoints = [a.adjoint() for a in elements]
    size = len(elements)
    entries = np.zeros((size, size), dtype=complex)
    for i in range(size):
        for j in range(size):
            entries[i, j] = phi(adjoints[i] * elements[j])
    if labels is None:
        labels = [max(a.terms, key=len, default=ONE) for a in elements]
    return MomentMatrix(list(labels), entries)


def _witness(matrix: MomentMatrix) -> tuple[float, dict[str, list[float]] | None]:
    values, vectors = matrix.spectrum()
    vector = vectors[:, 0]
    witness = {
        " ".join(word) or "1": [float(c.real), float(c.imag)]
        for word, c in zip(matrix.basis, vector)
        if abs(c) > 1e-8
    }
    return float(values[0]), witness


# ============================================================================
# Hermitian, state and conditional-positivity checks
# ============================================================================


@dataclass
class HermitianReport:
    passed: bool
    residual: float
    tolerance: float
    witness: Word | None = None

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "witness": list(self.witness) if self.witness is not None else None,
        }


def check_hermitian(
    phi: LinearFunctional,
    degree_cap: int = DEFAULTS["degree_cap"],
    tol: float = DEFAULTS["axiom_tolerance"],
) -> HermitianReport:
    """max |φ(w*) − conj φ(w)| over normal-form words up to the cap."""
    algebra = phi.algebra
    residual = abs(phi.unit_value.imag)
    witness: Word | None = ONE if residual > tol else None
    scale = 1.0
    for word in algebra.word_basis(degree_cap):
        value = phi(NCPolynomial.word(algebra, *word))
        mirrored = phi(NCPolynomial.word(algebra, *algebra.adjoint_word(word)))
        scale = max(scale, abs(value))
        gap = abs(mirrored - value.conjugate())
        if gap > residual:
            residual, witness = gap, word
    passed = residual <= tol * scale
    return HermitianReport(passed, residual, tol, None if passed else witness)


@dataclass
class StateReport:
    """Outcome of a moment-matrix positivity test."""

    passed: bool
    min_eigenvalue: float
    tolerance: float
    dimension: int
    hermitian: HermitianReport
    witness: dict[str, list[float]] | None = None

    def __bool__(self) -> bool:
        return self.passed

    @property
    def margin(self) -> float:
        return self.min_eigenvalue

    def to_dict(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "min_eigenvalue": self.min_eigenvalue,
            "tolerance": self.tolerance,
            "dimension": self.dimension,
            "hermitian": self.hermitian.to_dict(),
            "witness": self.witness,
        }


CPReport = StateReport


def _psd_report(
    matrix: MomentMatrix, hermitian: HermitianReport, tol: float
) -> StateReport:
    if not matrix.entries.size:
        return StateReport(hermitian.passed, 0.0, tol, 0, hermitian)
    smallest, witness = _witness(matrix)
    psd = smallest >= -tol * matrix.scale
    passed = psd and hermitian.passed
    return StateReport(
        passed, smallest, tol, len(matrix.basis), hermitian, None if psd else witness
    )


def check_state(
    phi: LinearFunctional,
    degree_cap: int = DEFAULTS["degree_cap"],
    tol: float = PSD_TOLERANCE,
) -> StateReport:
    """PSD test of φ̃ on {𝟏} ∪ words up to ``degree_cap``."""
    extended = normalized_extension(phi)
    algebra = phi.algebra
    words = [ONE] + algebra.word_basis(degree_cap)
    elements = [NCPolynomial.word(algebra, *w) for w in words]
    matrix = moment_matrix(extended, elements, words)
    report = _psd_report(matrix, check_hermitian(extended, degree_cap), tol)
    _LOGGER.debug(
        "State check %s at degree %d: %dx%d, min eigenvalue %.3g",
        phi.label or phi,
        degree_cap,
        len(words),
        len(words),
        report.min_eigenvalue,
    )
    return report


def check_conditionally_positive(
    psi: LinearFunctional,
    degree_cap: int = DEFAULTS["degree_cap"],
    tol: float = PSD_TOLERANCE,
) -> StateReport:
    """Hermitian check plus PSD of ψ(c_i* c_j) over centered kernel words."""
    algebra = psi.algebra
    words = algebra.word_basis(degree_cap)
    elements = [centered_polynomial(algebra, w) for w in words]
    matrix = moment_matrix(psi, elements, words)
    return _psd_report(matrix, check_hermitian(psi, degree_cap), tol)


# ============================================================================
# GNS construction
# ============================================================================


@dataclass
class GNSData:
    """(D, ρ, η) reconstructed from a conditionally positive ψ.

    ``rho`` holds ρ on the centered generators (the kernel representation);
    ``unital_rho`` adds δ(g)·I. ``vectors[:, j]`` is η of ``basis[j]``.
    """

    algebra: AlgebraPresentation
    basis: list[Word]
    gram: np.ndarray
    vectors: np.ndarray
    rho: dict[str, np.ndarray]
    eta: dict[str, np.ndarray]
    psi: dict[str, complex]
    representation_residual: float = 0.0
    reconstruction_residual: float = 0.0

    @property
    def dimension(self) -> int:
        return int(self.vectors.shape[0])

    def unital_rho(self, name: str) -> np.ndarray:
        return self.rho[name] + self.algebra.counit((name,)) * np.eye(self.dimension)

    def eta_of(self, word: Word) -> np.ndarray:
        return self.vectors[:, self.basis.index(word)]

    def to_dict(self) -> dict[str, Any]:
        return {
            "dimension": self.dimension,
            "basis_size": len(self.basis),
            "representation_residual": self.representation_residual,
            "reconstruction_residual": self.reconstruction_residual,
        }


def _coordinates(p: NCPolynomial, index: Mapping[Word, int], size: int) -> np.ndarray | None:
    vector = np.zeros(size, dtype=complex)
    for word, coeff in p.items():
        if not word:
            continue
        if word not in index:
            return None
        vector[index[word]] += coeff
    return vector


def gns_construct(
    psi: LinearFunctional,
    degree_cap: int = DEFAULTS["degree_cap"],
    tol: float = PSD_TOLERANCE,
) -> GNSData:
    """Rank-revealing factorization of the Gram matrix ψ(c_i* c_j)."""
    algebra = psi.algebra
    words = algebra.word_basis(degree_cap)
    index = {w: i for i, w in enumerate(words)}
    elements = [centered_polynomial(algebra, w) for w in words]
    matrix = moment_matrix(psi, elements, words)
    gram = matrix.entries
    values, vectors = matrix.spectrum()
    threshold = tol * matrix.scale
    if values.size and values[0] < -threshold:
        raise NotConditionallyPositive(
            f"Gram matrix of {psi.label or 'ψ'} at degree {degree_cap} has "
            f"eigenvalue {values[0]:.3g}"
        )
    keep = values > threshold
    factor = np.sqrt(values[keep])[:, None] * vectors[:, keep].conj().T
    rank = int(keep.sum())
    reconstruction = float(np.abs(factor.conj().T @ factor - gram).max()) if gram.size else 0.0

    shorter = [i for i, w in enumerate(words) if algebra.degree(w) <= degree_cap - 1]
    rho: dict[str, np.ndarray] = {}
    eta: dict[str, np.ndarray] = {}
    psi_values: dict[str, complex] = {}
    representation = 0.0
    pinv = scipy.linalg.pinv(factor[:, shorter]) if shorter and rank else None
    for g in algebra.generators:
        centered = centered_polynomial(algebra, (g.name,))
        if (g.name,) in index:
            eta[g.name] = factor[:, index[(g.name,)]]
        else:
            eta[g.name] = np.zeros(rank, dtype=complex)
        psi_values[g.name] = psi.centered_value((g.name,))
        if pinv is None:
            rho[g.name] = np.zeros((rank, rank), dtype=complex)
            continue
        images = np.zeros((rank, len(shorter)), dtype=complex)
        for column, i in enumerate(shorter):
            coords = _coordinates(centered * elements[i], index, len(words))
            if coords is not None:
                images[:, column] = factor @ coords
        rho[g.name] = images @ pinv
        representation = max(
            representation,
            float(np.abs(rho[g.name] @ factor[:, shorter] - images).max()),
        )
    _LOGGER.debug(
        "GNS of %s at degree %d: rank %d of %d, residuals %.2e / %.2e",
        psi.label or "ψ",
        degree_cap,
        rank,
        len(words),
        representation,
        reconstruction,
    )
    return GNSData(
        algebra,
        words,
        gram,
        factor,
        rho,
        eta,
        psi_values,
        representation,
        reconstruction,
    )


# ============================================================================
# Functionals from cocycle data
# ============================================================================


class _Cocycle:
    """Cocycle recursion for η and ψ on arbitrary (not necessarily normal) words."""

    def __init__(
        self,
        algebra: AlgebraPresentation,
        rho: Mapping[str, np.ndarray],
        eta: Mapping[str, np.ndarray],
        psi: Mapping[str, complex],
    ) -> None:
        self.algebra = algebra
        self.rho = {k: np.asarray(v, dtype=complex) for k, v in rho.items()}
        self.eta_generators = {k: np.asarray(v, dtype=complex) for k, v in eta.items()}
        self.psi_generators = {k: complex(v) for k, v in psi.items()}
        dims = {v.shape[0] for v in self.eta_generators.values()}
        self.dimension = dims.pop() if dims else 0
        self._eta: dict[Word, np.ndarray] = {}
        self._psi: dict[Word, complex] = {}

    def eta(self, word: Word) -> np.ndarray:
        if not word:
            return np.zeros(self.dimension, dtype=complex)
        cached = self._eta.get(word)
        if cached is None:
            head, rest = word[0], word[1:]
            if not rest:
                cached = self.eta_generators[head]
            else:
                cached = (
                    self.rho[head] @ self.eta(rest)
                    + self.eta_generators[head] * self.algebra.counit(rest)
                )
            self._eta[word] = cached
        return cached

    def psi(self, word: Word) -> complex:
        if not word:
            return 0j
        cached = self._psi.get(word)
        if cached is None:
            head, rest = word[0], word[1:]
            if not rest:
                cached = self.psi_generators[head]
            else:
                adjoint = self.algebra.symbol(head).adjoint_name
                cached = (
                    complex(np.vdot(self.eta_generators[adjoint], self.eta(rest)))
                    + self.psi_generators[head] * self.algebra.counit(rest)
                    + self.algebra.counit((head,)) * self.psi(rest)
                )
            self._psi[word] = cached
        return cached


def functional_from_cocycle(
    algebra: AlgebraPresentation,
    rho: Mapping[str, np.ndarray],
    eta: Mapping[str, np.ndarray],
    psi: Mapping[str, complex],
    label: str = "",
) -> LinearFunctional:
    """ψ from generator data by η(vw) = ρ(v)η(w) + η(v)δ(w) and
    ψ(vw) = ⟨η(v*), η(w)⟩ + ψ(v)δ(w) + δ(v)ψ(w).

    ``rho`` is the unital representation on generators, ``eta`` and ``psi``
    are the values on generators (η(𝟏) = 0, ψ(𝟏) = 0).
    """
    cocycle = _Cocycle(algebra, rho, eta, psi)
    functional = LinearFunctional(algebra, cocycle.psi, hermitian=True, label=label)
    functional.cocycle = cocycle  # type: ignore[attr-defined]
    return functional


def random_cocycle_functional(
    algebra: AlgebraPresentation,
    h_dim: int,
    seed: int = DEFAULTS["seed"],
    label: str = "",
) -> LinearFunctional:
    """Conditionally positive ψ from random GNS data on a tensor algebra."""
    rng = np.random.default_rng(seed)
    rho: dict[str, np.ndarray] = {}
    eta: dict[str, np.ndarray] = {}
    psi: dict[str, complex] = {}
    for g in algebra.generators:
        if g.name in rho:
            continue
        block = rng.normal(size=(h_dim, h_dim)) + 1j * rng.normal(size=(h_dim, h_dim))
        eta[g.name] = rng.normal(size=h_dim) + 1j * rng.normal(size=h_dim)
        if g.adjoint_name == g.name:
            rho[g.name] = (block + block.conj().T) / 2
            psi[g.name] = complex(rng.normal())
        else:
            rho[g.name], rho[g.adjoint_name] = block, block.conj().T
            eta[g.adjoint_name] = rng.normal(size=h_dim) + 1j * rng.normal(size=h_dim)
            psi[g.name] = complex(rng.normal(), rng.normal())
            psi[g.adjoint_name] = psi[g.name].conjugate()
    return functional_from_cocycle(algebra, rho, eta, psi, label=label or f"random(H={h_dim})")


# ============================================================================
# Generator triples (W, L, G)
# ============================================================================


def _complex_array(data: Any) -> np.ndarray:
    """Nested lists with [re, im] leaves (or plain reals) to a complex array."""
    array = np.asarray(data, dtype=float)
    if array.ndim and array.shape[-1] == 2:
        return array[..., 0] + 1j * array[..., 1]
    return array.astype(complex)


def _pairs(array: np.ndarray) -> Any:
    return np.stack([array.real, array.imag], axis=-1).tolist()


@dataclass
class GeneratorTriple:
    """(W, L, G) parametrization of generators on K⟨d⟩ or ℂF_n.

    unitary:d: W is a (dH × dH) unitary, L has shape (d, d, H), G (d, d).
    freegroup:n: W has shape (n, H, H), L (n, H), G (n,).
    """

    model: str
    size: int
    h_dim: int
    W: np.ndarray
    L: np.ndarray
    G: np.ndarray
    tolerance: float = DEFAULTS["axiom_tolerance"]

    def __post_init__(self) -> None:
        self.W = np.asarray(self.W, dtype=complex)
        self.L = np.asarray(self.L, dtype=complex)
        self.G = np.asarray(self.G, dtype=complex)
        d, h = self.size, self.h_dim
        if self.model == "unitary":
            shapes = {"W": (d * h, d * h), "L": (d, d, h), "G": (d, d)}
            unitaries = [self.W]
        elif self.model == "freegroup":
            shapes = {"W": (d, h, h), "L": (d, h), "G": (d,)}
            unitaries = list(self.W) if self.W.shape == shapes["W"] else []
        else:
            raise ValueError(f"unknown triple model {self.model!r}")
        for name, shape in shapes.items():
            actual = getattr(self, name).shape
            if actual != shape:
                raise ValueError(f"{self.model}:{d} triple: {name} has shape {actual}, expected {shape}")
        for unitary in unitaries:
            gap = np.abs(unitary.conj().T @ unitary - np.eye(unitary.shape[0])).max()
            if gap > self.tolerance:
                raise ValueError(f"W is not unitary (residual {gap:.3g})")

    @property
    def algebra(self) -> AlgebraPresentation:
        if self.model == "unitary":
            return unitary_algebra(self.size)
        return free_group_algebra(self.size)

    @property
    def dual_semigroup_name(self) -> str:
        return f"{self.model}:{self.size}"

    def block(self, k: int, l: int) -> np.ndarray:
        """W_kl acting on H (0-based block indices)."""
        h = self.h_dim
        return self.W[k * h : (k + 1) * h, l * h : (l + 1) * h]

    def generator_data(
        self,
    ) -> tuple[dict[str, np.ndarray], dict[str, np.ndarray], dict[str, complex]]:
        """Unital ρ, η and ψ on every generator, adjoints derived."""
        rho: dict[str, np.ndarray] = {}
        eta: dict[str, np.ndarray] = {}
        psi: dict[str, complex] = {}
        if self.model == "unitary":
            d = self.size
            names = {(k - 1, l - 1): (n, a) for k, l, n, a in unitary_generator_names(d)}
            for (k, l), (name, adjoint) in names.items():
                rho[name] = self.block(k, l)
                rho[adjoint] = self.block(k, l).conj().T
                eta[name] = self.L[k, l]
                # η(x*_kl) = −Σ_n W_nl† η(x_nk)
                eta[adjoint] = -sum(
                    self.block(n, l).conj().T @ self.L[n, k] for n in range(d)
                )
                psi[name] = complex(self.G[k, l])
                psi[adjoint] = complex(self.G[k, l]).conjugate()
        else:
            for i, (g, inverse) in enumerate(free_group_names(self.size)):
                rho[g], rho[inverse] = self.W[i], self.W[i].conj().T
                eta[g] = self.L[i]
                eta[inverse] = -self.W[i].conj().T @ self.L[i]
                psi[g] = complex(self.G[i])
                psi[inverse] = complex(self.G[i]).conjugate()
        return rho, eta, psi

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> GeneratorTriple:
        model = str(data["model"])
        if ":" in model:
            model, _, size = model.partition(":")
            count = int(size)
        else:
            count = int(data.get("d", data.get("n", 1)))
        return cls(
            model,
            count,
            int(data["H_dim"]),
            _complex_array(data["W"]),
            _complex_array(data["L"]),
            _complex_array(data["G"]),
        )

    def to_dict(self) -> dict[str, Any]:
        key = "d" if self.model == "unitary" else "n"
        return {
            "model": self.model,
            key: self.size,
            "H_dim": self.h_dim,
            "W": _pairs(self.W),
            "L": _pairs(self.L),
            "G": _pairs(self.G),
        }


def relation_residual(
    functional: LinearFunctional,
    degree_cap: int,
) -> tuple[float, Word | None]:
    """Largest |ψ(u·(lhs − rhs)·u')| over rules and short contexts."""
    cocycle: _Cocycle = functional.cocycle  # type: ignore[attr-defined]
    algebra = functional.algebra
    worst, witness = 0.0, None
    for rule in algebra.rules:
        room = degree_cap - algebra.degree(rule.lhs)
        if room < 0:
            continue
        contexts = [ONE] + algebra.word_basis(room) if room else [ONE]
        for left in contexts:
            for right in contexts:
                if algebra.degree(left) + algebra.degree(right) > room:
                    continue
                value = cocycle.psi(left + rule.lhs + right) - sum(
                    (c * cocycle.psi(left + word + right) for word, c in rule.rhs), 0j
                )
                if abs(value) > worst:
                    worst, witness = abs(value), left + rule.lhs + right
    return worst, witness


def functional_from_triple(
    triple: GeneratorTriple,
    degree_cap: int = DEFAULTS["degree_cap"],
    tol: float = PSD_TOLERANCE,
) -> LinearFunctional:
    """ψ of the (W, L, G) triple; raises when ψ does not respect the relations."""
    rho, eta, psi = triple.generator_data()
    functional = functional_from_cocycle(
        triple.algebra, rho, eta, psi, label=f"triple({triple.dual_semigroup_name})"
    )
    residual, witness = relation_residual(functional, degree_cap)
    if residual > tol:
        raise RelationInconsistency(
            f"ψ of the {triple.dual_semigroup_name} triple does not vanish on the "
            f"relation ideal (residual {residual:.3g} at {' '.join(witness or ())})",
            witness=witness,
            residual=residual,
        )
    _LOGGER.debug(
        "Triple %s respects relations up to degree %d (residual %.2e)",
        triple.dual_semigroup_name,
        degree_cap,
        residual,
    )
    return functional


__all__ = [
    "CPReport",
    "GNSData",
    "GeneratorTriple",
    "HermitianReport",
    "MomentMatrix",
    "StateReport",
    "check_conditionally_positive",
    "check_hermitian",
    "check_state",
    "functional_from_cocycle",
    "functional_from_triple",
    "gns_construct",
    "moment_matrix",
    "normalized_extension",
    "random_cocycle_functional",
    "relation_residual",
    "restrict_to_kernel",
]
