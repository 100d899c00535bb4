"""Bieberbach groups as integral cusp subgroups of hyperbolic orthogonal groups."""

from .catalog import catalog_lookup, catalog_names
from .crystal import AffineIsometry, CrystalGroupSpec, Word, evaluate_word
from .embed import EmbeddingResult, embed_pipeline
from .exact_linalg import Matrix, SymmetricForm, Vector, signature

__all__ = [
    "AffineIsometry",
    "CrystalGroupSpec",
    "EmbeddingResult",
    "Matrix",
    "SymmetricForm",
    "Vector",
    "Word",
    "catalog_lookup",
    "catalog_names",
    "embed_pipeline",
    "evaluate_word",
    "signature",
]
