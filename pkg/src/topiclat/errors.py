"""Exception taxonomy.

Exit-code mapping for the CLI: ConfigError -> 1, DataError subclasses -> 2,
anything else -> 3.
"""


class TopiclatError(Exception):
    """Base class for all engine errors."""


class ConfigError(TopiclatError):
    """Invalid or inconsistent configuration (bad key, bad value, bad combination)."""


class DataError(TopiclatError):
    """Problems with user-supplied data (corpus files, judgments, artifacts)."""


# corpus
class ParseError(DataError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class DuplicateId(DataError):
    def __init__(self, doc_id: str, line_no: int | None = None):
        where = f" (line {line_no})" if line_no is not None else ""
        super().__init__(f"duplicate document id {doc_id!r}{where}")
        self.doc_id = doc_id


class EmptyDocument(DataError):
    def __init__(self, doc_id: str):
        super().__init__(f"document {doc_id!r} has no tokens after normalization")
        self.doc_id = doc_id


# sparse
class EmptyVocabulary(DataError):
    pass


class UnknownTerm(DataError):
    pass


class ShapeMismatch(TopiclatError):
    pass


# lsa
class RankTooLarge(ConfigError):
    pass


class ConvergenceFailure(TopiclatError):
    pass


# lda
class EmptyStream(DataError):
    pass


class InvalidTokenId(DataError):
    pass


# embed
class MissingEmbedding(DataError):
    def __init__(self, chunk_id: str):
        super().__init__(f"no embedding for chunk {chunk_id!r}")
        self.chunk_id = chunk_id


class TransportError(TopiclatError):
    pass


class DegenerateInput(DataError):
    """Zero-evidence input (empty query, all-zero vector) rejected by a stage."""


# fusion
class MissingComponent(DataError):
    pass


class DegenerateResult(TopiclatError):
    pass


class FingerprintMismatch(DataError):
    pass


# index
class DimensionMismatch(DataError):
    pass


class DuplicateChunkId(DataError):
    pass


class EmptyIndex(DataError):
    pass


class ArtifactError(DataError):
    """Unreadable, truncated, or wrong-format artifact file."""


# evaluation
class KTooLarge(ConfigError):
    pass


class SingleCluster(DataError):
    pass


class NEqualsK(DataError):
    pass


class CoincidentCentroids(DataError):
    pass


class MissingJudgments(DataError):
    def __init__(self, query_id: str):
        super().__init__(f"no relevance judgments for query {query_id!r}")
        self.query_id = query_id
