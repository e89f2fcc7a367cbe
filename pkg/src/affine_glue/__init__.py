"""Exact affine embeddings of curve complexes whose ends are glued onto singular points."""
from .embedder import AffinizationResult, Certificate, affinize, compute_v_q
from .errors import (
    AffineGlueError,
    CriterionRejected,
    MalformedArc,
    ParseError,
    ValidationError,
)
from .exact import PLFunction, PLPath, solve_first_crossing, std_connection
from .oracle import brute_force_shadows, verify
from .serialize import parse_embedding, parse_instance, serialize_embedding, serialize_instance
from .space import Arc, EndSpec, PointEntry, SpaceDescription, germ_table, shadow_set, validate
from .unbounded import ExtendedSpace, UnboundedArc, affinize_unbounded
from .verifier import check_condition_2, discontinuity_locus

__version__ = "0.1.0"

__all__ = [
    "AffineGlueError",
    "AffinizationResult",
    "Arc",
    "Certificate",
    "CriterionRejected",
    "EndSpec",
    "ExtendedSpace",
    "MalformedArc",
    "PLFunction",
    "PLPath",
    "ParseError",
    "PointEntry",
    "SpaceDescription",
    "UnboundedArc",
    "ValidationError",
    "affinize",
    "affinize_unbounded",
    "brute_force_shadows",
    "check_condition_2",
    "compute_v_q",
    "discontinuity_locus",
    "germ_table",
    "parse_embedding",
    "parse_instance",
    "serialize_embedding",
    "serialize_instance",
    "shadow_set",
    "solve_first_crossing",
    "std_connection",
    "validate",
    "verify",
]
