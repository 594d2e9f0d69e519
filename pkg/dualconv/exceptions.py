"""Exceptions raised by dualconv.

Two families: ``ConfigError`` for anything wrong with a job file or a
name lookup (the CLI maps it to exit code 2) and ``ComputationError`` for
everything raised while computing (exit code 3). Failed law, axiom or
positivity checks are not exceptions; they come back as report entries.
"""

from __future__ import annotations

from typing import Any


class DualConvError(Exception):
    """Root of the dualconv exception hierarchy."""


class ConfigError(DualConvError):
    """Malformed job configuration or unknown registry name."""


class ComputationError(DualConvError):
    """Raised while evaluating algebra, products or exponentials."""


class NonTerminatingRewrite(ComputationError):
    """Rewriting exceeded the presentation's step cap."""


class AlgebraMismatch(ComputationError):
    """Operands belong to different presentations (or a letter is unknown)."""


class BadComponentIndex(ComputationError):
    """A leg refers to a component outside the free-product family."""


class ComponentFamilyMismatch(ComputationError):
    """Free-product operands are built over different component families."""


class TargetMismatch(ComputationError):
    """Homomorphism family does not fit the free product it is applied to."""


class NoAntipode(ComputationError):
    """Antipode check requested on a dual semigroup without antipode."""


class EvaluationDepthExceeded(ComputationError):
    """Free-product centering recursion went deeper than allowed."""


class ArityMismatch(ComputationError):
    """Number of functionals differs from the number of components."""


class ClosureCapExceeded(ComputationError):
    """Sub-coalgebra closure grew beyond its size or degree cap."""


class NotConditionallyPositive(ComputationError):
    """GNS construction requested for a functional that is not CP."""


class GridMismatch(ComputationError):
    """Time grids are not nested as required, or do not fit a joint word."""


class TruncationTooSmall(ComputationError):
    """Fock space truncation is shorter than the queried word."""


class RelationInconsistency(ComputationError):
    """Generator data does not annihilate the relation ideal.

    ``witness`` is the raw word on which the residual was observed and
    ``residual`` its magnitude.
    """

    def __init__(self, message: str, witness: Any = None, residual: float = 0.0):
        super().__init__(message)
        self.witness = witness
        self.residual = residual
