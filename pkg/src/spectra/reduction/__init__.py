"""Compile sentences over binary relations into sentences over bipartite graphs."""

from .encoding import (
    ClassificationError,
    DecodeError,
    Encoding,
    Role,
    RoleClassification,
    classify_vertices,
    decode_graph,
    encode_structure,
)
from .formulas import PsiBuilder, build_base_predicates, build_dist
from .gadgets import gadget_c, gadget_d
from .params import ReductionError, ReductionParams
from .translate import (
    Preprocessed,
    ReductionOutput,
    eliminate_self_loops,
    lift_structure,
    pad_relations,
    preprocess,
    reduce,
    translate,
)

__all__ = [
    "ClassificationError",
    "DecodeError",
    "Encoding",
    "Preprocessed",
    "PsiBuilder",
    "ReductionError",
    "ReductionOutput",
    "ReductionParams",
    "Role",
    "RoleClassification",
    "build_base_predicates",
    "build_dist",
    "classify_vertices",
    "decode_graph",
    "eliminate_self_loops",
    "encode_structure",
    "lift_structure",
    "gadget_c",
    "gadget_d",
    "pad_relations",
    "preprocess",
    "reduce",
    "translate",
]
