"""Exact computations on stratified nilpotent Lie algebras and Carnot groups."""
from .algebra import (
    ParseError,
    StratificationError,
    StratifiedAlgebra,
    StructureError,
    abelian,
    bracket_vec,
    engel,
    format_algebra,
    free_nilpotent,
    heisenberg,
    infer_stratification,
    lower_central_series,
    parse_algebra,
    validate,
)
from .derivations import GradedMap, graded_derivations, isometric_part, strata_derivations
from .group_law import (
    NotAutomorphismError,
    automorphism_to_map,
    bch,
    dilation,
    is_isometric_automorphism,
    left_invariant_field,
    right_invariant_field,
)
from .john import NormSpec, gram_from_norm, inner_john, mvee, parse_norm
from .killing import KillingAlgebra, contact_check, killing_basis, killing_filtration, push_forward
from .linalg import BACKEND, Subspace
from .polynomial import Poly, PolyVectorField, field_bracket
from .prolongation import ProlongationTower, prolong

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "GradedMap",
    "KillingAlgebra",
    "NormSpec",
    "NotAutomorphismError",
    "ParseError",
    "Poly",
    "PolyVectorField",
    "ProlongationTower",
    "StratificationError",
    "StratifiedAlgebra",
    "StructureError",
    "Subspace",
    "abelian",
    "automorphism_to_map",
    "bch",
    "bracket_vec",
    "contact_check",
    "dilation",
    "engel",
    "field_bracket",
    "format_algebra",
    "free_nilpotent",
    "gram_from_norm",
    "graded_derivations",
    "heisenberg",
    "infer_stratification",
    "inner_john",
    "is_isometric_automorphism",
    "isometric_part",
    "killing_basis",
    "killing_filtration",
    "left_invariant_field",
    "lower_central_series",
    "mvee",
    "parse_algebra",
    "parse_norm",
    "prolong",
    "push_forward",
    "right_invariant_field",
    "strata_derivations",
    "validate",
]
