"""Convolution exponentials, Schoenberg correspondence and Lévy processes
on dual semigroups under the five universal independences.

Modules:
- algebra: presented *-algebras, normal forms, free products, functionals
- dualsg: dual semigroups, iterated comultiplication, law checks
- products: tensor, free, boolean, monotone and antimonotone products
- convolution: ⋆-products and convolution exponentials on S(ℬ)
- positivity: moment matrices, conditional positivity, GNS data
- levy: joint increments, refinement, Fock space realizations
- cli: batch front-end for JSON job files
"""

from dualconv.algebra import (
    AlgebraPresentation,
    FreeProductElement,
    LinearFunctional,
    NCPolynomial,
    free_algebra,
    free_group_algebra,
    unitary_algebra,
)
from dualconv.convolution import (
    ExponentialSemigroup,
    conv_exp,
    exp_series,
    star,
    star_power,
    trotter_exp,
    trotter_sweep,
)
from dualconv.dualsg import (
    DualSemigroup,
    check_dualsg_laws,
    comultiply,
    get_dual_semigroup,
    iterate_delta,
)
from dualconv.levy import (
    TimeGrid,
    fock_moment,
    joint_functional,
    refinement_check,
    schoenberg_verify,
)
from dualconv.positivity import (
    GeneratorTriple,
    check_conditionally_positive,
    check_state,
    functional_from_triple,
    gns_construct,
)
from dualconv.products import ProductKind, check_axioms, eval_product, fold_product

__version__ = "0.1.0"

__all__ = [
    "AlgebraPresentation",
    "DualSemigroup",
    "ExponentialSemigroup",
    "FreeProductElement",
    "GeneratorTriple",
    "LinearFunctional",
    "NCPolynomial",
    "ProductKind",
    "TimeGrid",
    "check_axioms",
    "check_conditionally_positive",
    "check_dualsg_laws",
    "check_state",
    "comultiply",
    "conv_exp",
    "eval_product",
    "exp_series",
    "fock_moment",
    "fold_product",
    "free_algebra",
    "free_group_algebra",
    "functional_from_triple",
    "get_dual_semigroup",
    "gns_construct",
    "iterate_delta",
    "joint_functional",
    "refinement_check",
    "schoenberg_verify",
    "star",
    "star_power",
    "trotter_exp",
    "trotter_sweep",
    "unitary_algebra",
]
