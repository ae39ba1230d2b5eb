"""Error taxonomy shared across the pipeline.

Every error carries a machine-parsable ``category`` so the CLI and HTTP
service can report failures as ``{category, message}`` without stack traces.
"""

from __future__ import annotations


class IdeaForgeError(Exception):
    """Base class; ``category`` is a stable kebab-case identifier."""

    category = "error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.__class__.__name__)
        self.message = message or self.__class__.__name__


# provider gateway

class ProviderUnavailable(IdeaForgeError):
    category = "provider-unavailable"


class BudgetExceeded(IdeaForgeError):
    category = "budget-exceeded"


class RetriesExhausted(IdeaForgeError):
    category = "retries-exhausted"

    def __init__(self, message: str, attempts: int, last_error: BaseException | None = None):
        super().__init__(message)
        self.attempts = attempts
        self.last_error = last_error


class EmptyInput(IdeaForgeError):
    category = "empty-input"


# corpus ingest

class FetchFailed(RetriesExhausted):
    """Fetch gave up; attempt count mirrors the retry policy that drove it."""

    category = "fetch-failed"

    def __init__(self, message: str, attempts: int = 1, last_error: BaseException | None = None):
        super().__init__(message, attempts=attempts, last_error=last_error)


class ParseFailed(IdeaForgeError):
    category = "parse-failed"


class SelectionInvalid(IdeaForgeError):
    category = "selection-invalid"


class HopLimitExceeded(IdeaForgeError):
    category = "hop-limit-exceeded"


class PdfUnreadable(IdeaForgeError):
    category = "pdf-unreadable"


class EmptyDirectory(IdeaForgeError):
    category = "empty-directory"


# vector store

class DimensionMismatch(IdeaForgeError):
    category = "dimension-mismatch"


class DuplicateId(IdeaForgeError):
    category = "duplicate-id"


class ZeroVector(IdeaForgeError):
    category = "zero-vector"


class EmptyCollection(IdeaForgeError):
    category = "empty-collection"


class CorruptStore(IdeaForgeError):
    category = "corrupt-store"


# topic tree

class MalformedTopicList(IdeaForgeError):
    category = "malformed-topic-list"


# ideation

class InsufficientTopics(IdeaForgeError):
    category = "insufficient-topics"


class MissingEmbeddings(IdeaForgeError):
    category = "missing-embeddings"


class GenerationEmpty(IdeaForgeError):
    category = "generation-empty"


# scholarly client

class NotFound(IdeaForgeError):
    category = "not-found"


class ApiError(IdeaForgeError):
    category = "api-error"


# refinement

class EmptyHarvest(IdeaForgeError):
    category = "empty-harvest"


class InsufficientIdeas(IdeaForgeError):
    category = "insufficient-ideas"


class NoReviewCorpus(IdeaForgeError):
    category = "no-review-corpus"


class MalformedPlan(IdeaForgeError):
    category = "malformed-plan"


# evaluator

class UnparsableScores(IdeaForgeError):
    category = "unparsable-scores"


# cli / service

class UsageError(IdeaForgeError):
    category = "usage-error"


class StoreUninitialized(IdeaForgeError):
    category = "store-uninitialized"


class PortInUse(IdeaForgeError):
    category = "port-in-use"
