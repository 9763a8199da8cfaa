"""Topic-enriched retrieval engine.

Fuses term-frequency weights (TF-IDF), latent semantic structure (truncated
SVD), and probabilistic topic mixtures (collapsed-Gibbs LDA) into contextual
chunk embeddings, indexes the enriched vectors, answers exact kNN queries, and
evaluates clustering coherence and retrieval precision.
"""

__version__ = "0.1.0"

from . import errors

__all__ = ["errors", "__version__"]
