"""Uniform access to chat-completion and embedding providers.

Ships a deterministic offline mock (scripted chat responses plus a
feature-hashing embedder) and a thin HTTP client for OpenAI-style
chat/embedding endpoints. All outbound calls share a retry policy,
a token-bucket rate limiter and a character-based token budget.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import re
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import requests

from .errors import (
    BudgetExceeded,
    EmptyInput,
    ProviderUnavailable,
    RetriesExhausted,
)

DEFAULT_MAX_RETRIES = 5
DEFAULT_BACKOFF_BASE_MS = 250
BACKOFF_CAP_S = 8.0
DEFAULT_BUDGET_TOKENS = 6000
DEFAULT_CHARS_PER_TOKEN = 4.0


@dataclass(frozen=True)
class TokenBudget:
    """Request-size ceiling, estimated as ceil(chars / chars_per_token)."""

    max_tokens: int = DEFAULT_BUDGET_TOKENS
    chars_per_token: float = DEFAULT_CHARS_PER_TOKEN

    def __post_init__(self):
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")
        if self.chars_per_token <= 0:
            raise ValueError("chars_per_token must be positive")

    def estimate(self, text_or_chars: str | int) -> int:
        chars = text_or_chars if isinstance(text_or_chars, int) else len(text_or_chars)
        return math.ceil(chars / self.chars_per_token)

    def max_chars(self) -> int:
        return int(self.max_tokens * self.chars_per_token)


@dataclass(frozen=True)
class RetryPolicy:
    max_retries: int = DEFAULT_MAX_RETRIES
    backoff_base_ms: int = DEFAULT_BACKOFF_BASE_MS

    def __post_init__(self):
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.backoff_base_ms <= 0:
            raise ValueError("backoff_base_ms must be positive")

    @property
    def max_attempts(self) -> int:
        return 1 + self.max_retries

    def backoff_s(self, attempt: int) -> float:
        """Exponential backoff for the given 1-based failed attempt, capped."""
        return min(self.backoff_base_ms / 1000.0 * (2 ** (attempt - 1)), BACKOFF_CAP_S)


@dataclass(frozen=True)
class ChatRequest:
    system_prompt: str
    user_prompt: str
    context_docs: tuple[str, ...] = ()
    max_output_tokens: int = 1024
    temperature: float = 0.7

    def __post_init__(self):
        if not self.user_prompt:
            raise ValueError("user_prompt must be non-empty")
        if self.max_output_tokens <= 0:
            raise ValueError("max_output_tokens must be positive")
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")
        object.__setattr__(self, "context_docs", tuple(self.context_docs))

    def fingerprint(self) -> str:
        payload = json.dumps(
            {
                "system": self.system_prompt,
                "user": self.user_prompt,
                "context": list(self.context_docs),
                "max_output_tokens": self.max_output_tokens,
                "temperature": self.temperature,
            },
            sort_keys=True,
            ensure_ascii=False,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ChatResponse:
    text: str
    provider_id: str
    request_fingerprint: str


@dataclass(frozen=True)
class EmbeddingVector:
    """Fixed-length float32 vector; all values finite."""

    values: np.ndarray
    dimension: int

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float32)
        if arr.ndim != 1 or arr.shape[0] != self.dimension:
            raise ValueError("values length must equal dimension")
        if not np.all(np.isfinite(arr)):
            raise ValueError("embedding values must be finite")
        object.__setattr__(self, "values", arr)

    @classmethod
    def of(cls, values) -> "EmbeddingVector":
        arr = np.asarray(values, dtype=np.float32)
        return cls(values=arr, dimension=int(arr.shape[0]))


def render_messages(request: ChatRequest) -> list[dict]:
    """Chat-completion message array; context docs live in the system message.

    A literal ``{context}`` placeholder in the system prompt is substituted,
    otherwise docs are appended to it.
    """
    docs = "\n\n".join(request.context_docs)
    system = request.system_prompt
    if "{context}" in system:
        system = system.replace("{context}", docs)
    elif docs:
        system = (system + "\n\n" + docs) if system else docs
    return [
        {"role": "system", "content": system},
        {"role": "user", "content": request.user_prompt},
    ]


def serialized_prompt(request: ChatRequest) -> str:
    """Text actually sent over the wire, used for budgeting and mock matching."""
    messages = render_messages(request)
    return messages[0]["content"] + "\n" + messages[1]["content"]


def with_retry(action: Callable[[], object], policy: RetryPolicy,
               sleep: Callable[[float], None] = time.sleep):
    """Run ``action`` until it succeeds or 1 + max_retries attempts are spent."""
    last: BaseException | None = None
    for attempt in range(1, policy.max_attempts + 1):
        try:
            return action()
        except Exception as exc:  # noqa: BLE001 - any failure is retried
            last = exc
            if attempt < policy.max_attempts:
                sleep(policy.backoff_s(attempt))
    raise RetriesExhausted(
        f"gave up after {policy.max_attempts} attempts: {last}",
        attempts=policy.max_attempts,
        last_error=last,
    )


def truncate_to_budget(docs: Sequence[str], budget: TokenBudget, reserved: int) -> list[str]:
    """Drop whole docs from the tail until the estimate fits max_tokens - reserved."""
    if reserved >= budget.max_tokens:
        raise BudgetExceeded(
            f"reserved tokens {reserved} >= budget {budget.max_tokens}"
        )
    allowed = budget.max_tokens - reserved
    kept: list[str] = []
    total_chars = 0
    for doc in docs:
        total_chars += len(doc)
        if budget.estimate(total_chars) > allowed:
            break
        kept.append(doc)
    return kept


class RateLimiter:
    """Token bucket: at most ``requests_per_window`` dispatches per window.

    Thread-safe; acquire() blocks until a slot frees up.
    """

    def __init__(self, requests_per_window: int = 10, window_s: float = 1.0,
                 sleep: Callable[[float], None] = time.sleep,
                 now: Callable[[], float] = time.monotonic):
        if requests_per_window < 1:
            raise ValueError("requests_per_window must be >= 1")
        self.requests_per_window = requests_per_window
        self.window_s = window_s
        self._sleep = sleep
        self._now = now
        self._stamps: list[float] = []
        self._lock = threading.Lock()

    def acquire(self):
        while True:
            with self._lock:
                t = self._now()
                self._stamps = [s for s in self._stamps if t - s < self.window_s]
                if len(self._stamps) < self.requests_per_window:
                    self._stamps.append(t)
                    return
                wait = self.window_s - (t - self._stamps[0])
            self._sleep(max(wait, 0.001))


class MockChatProvider:
    """Scripted responses keyed by regex over the serialized prompt.

    Unmatched prompts get a deterministic digest-based reply, so the mock is a
    pure function of the request fingerprint. Records every request for
    call-count and prompt-content assertions.
    """

    provider_id = "mock"

    def __init__(self, script: Sequence[tuple[str, str]] = (), default: str | None = None):
        self._script = [(re.compile(pattern, re.DOTALL), response)
                        for pattern, response in script]
        self._default = default
        self.calls: list[ChatRequest] = []

    def complete(self, request: ChatRequest) -> str:
        self.calls.append(request)
        prompt = serialized_prompt(request)
        for pattern, response in self._script:
            if pattern.search(prompt):
                return response
        if self._default is not None:
            return self._default
        return "mock:" + request.fingerprint()[:16]


class HashEmbedder:
    """Feature-hashing bag-of-words embedder, L2-normalized.

    Buckets and signs come from sha1 of each lowercased token, so vectors are
    stable across processes and runs.
    """

    provider_id = "hash-embedder"
    _token_re = re.compile(r"[a-z0-9]+")

    def __init__(self, dimension: int = 256):
        if dimension < 2:
            raise ValueError("dimension must be >= 2")
        self.dimension = dimension

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        return [self._embed_one(t) for t in texts]

    def _embed_one(self, text: str) -> EmbeddingVector:
        vec = np.zeros(self.dimension, dtype=np.float64)
        for token in self._token_re.findall(text.lower()):
            digest = hashlib.sha1(token.encode("utf-8")).digest()
            bucket = int.from_bytes(digest[:4], "big") % self.dimension
            sign = 1.0 if digest[4] % 2 == 0 else -1.0
            vec[bucket] += sign
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            vec[0] = 1.0
            norm = 1.0
        return EmbeddingVector.of(vec / norm)


class HttpChatProvider:
    """OpenAI-style chat completions endpoint: POST {base}/chat/completions."""

    def __init__(self, base_url: str, model: str, api_key_env: str = "LLM_API_KEY",
                 timeout_s: float = 60.0, session: requests.Session | None = None):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key_env = api_key_env
        self.timeout_s = timeout_s
        self.session = session or requests.Session()
        self.provider_id = f"http:{model}"

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def complete(self, request: ChatRequest) -> str:
        payload = {
            "model": self.model,
            "messages": render_messages(request),
            "max_tokens": request.max_output_tokens,
            "temperature": request.temperature,
        }
        resp = self.session.post(
            self.base_url + "/chat/completions",
            json=payload, headers=self._headers(), timeout=self.timeout_s,
        )
        resp.raise_for_status()
        body = resp.json()
        return body["choices"][0]["message"]["content"]


class HttpEmbedder:
    """OpenAI-style embeddings endpoint: POST {base}/embeddings."""

    def __init__(self, base_url: str, model: str, api_key_env: str = "LLM_API_KEY",
                 timeout_s: float = 60.0, session: requests.Session | None = None):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key_env = api_key_env
        self.timeout_s = timeout_s
        self.session = session or requests.Session()
        self.provider_id = f"http-embed:{model}"

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        resp = self.session.post(
            self.base_url + "/embeddings",
            json={"model": self.model, "input": list(texts)},
            headers=self._headers(), timeout=self.timeout_s,
        )
        resp.raise_for_status()
        body = resp.json()
        return [EmbeddingVector.of(item["embedding"]) for item in body["data"]]


@dataclass
class ProviderGateway:
    """Budgeted, rate-limited, retrying front door for chat and embeddings."""

    chat_provider: object
    embedder: object
    budget: TokenBudget = field(default_factory=TokenBudget)
    retry: RetryPolicy = field(default_factory=RetryPolicy)
    limiter: RateLimiter = field(default_factory=RateLimiter)
    sleep: Callable[[float], None] = time.sleep

    def fit_context(self, request: ChatRequest) -> list[str]:
        """Context docs that survive budget truncation for this request."""
        base_chars = len(request.system_prompt.replace("{context}", "")) + len(request.user_prompt)
        reserved = self.budget.estimate(base_chars)
        if reserved > self.budget.max_tokens:
            raise BudgetExceeded(
                f"prompt alone needs {reserved} tokens, budget is {self.budget.max_tokens}"
            )
        if reserved < self.budget.max_tokens:
            return truncate_to_budget(request.context_docs, self.budget, reserved)
        return []

    def chat(self, request: ChatRequest) -> ChatResponse:
        docs = self.fit_context(request)
        bounded = ChatRequest(
            system_prompt=request.system_prompt,
            user_prompt=request.user_prompt,
            context_docs=tuple(docs),
            max_output_tokens=request.max_output_tokens,
            temperature=request.temperature,
        )

        def call():
            self.limiter.acquire()
            return self.chat_provider.complete(bounded)

        try:
            text = with_retry(call, self.retry, sleep=self.sleep)
        except RetriesExhausted as exc:
            raise ProviderUnavailable(f"chat provider failed: {exc.last_error}") from exc
        return ChatResponse(
            text=text,
            provider_id=getattr(self.chat_provider, "provider_id", "unknown"),
            request_fingerprint=bounded.fingerprint(),
        )

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        texts = list(texts)
        if not texts:
            raise EmptyInput("embed() requires at least one text")
        if any(not t for t in texts):
            raise EmptyInput("embed() texts must be non-empty")

        def call():
            self.limiter.acquire()
            return self.embedder.embed(texts)

        try:
            vectors = with_retry(call, self.retry, sleep=self.sleep)
        except RetriesExhausted as exc:
            raise ProviderUnavailable(f"embedding provider failed: {exc.last_error}") from exc
        dims = {v.dimension for v in vectors}
        if len(vectors) != len(texts) or len(dims) != 1:
            raise ProviderUnavailable("embedding provider returned a malformed batch")
        return vectors


def mock_gateway(script: Sequence[tuple[str, str]] = (), default: str | None = None,
                 dimension: int = 256, budget: TokenBudget | None = None) -> ProviderGateway:
    """Offline gateway used throughout the test suite and deterministic runs."""
    return ProviderGateway(
        chat_provider=MockChatProvider(script, default=default),
        embedder=HashEmbedder(dimension),
        budget=budget or TokenBudget(),
        retry=RetryPolicy(),
        limiter=RateLimiter(requests_per_window=1000, window_s=1.0),
        sleep=lambda _s: None,
    )
