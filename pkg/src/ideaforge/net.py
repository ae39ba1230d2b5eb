"""Retrying, rate-limited HTTP fetches with a swappable transport.

Tests inject a transport function instead of hitting the network; production
uses a shared requests session.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import requests

from .errors import FetchFailed, RetriesExhausted
from .providers import RateLimiter, RetryPolicy, with_retry

USER_AGENT = "ideaforge/0.1 (+research corpus tooling)"


@dataclass
class FetchResult:
    url: str
    status: int
    content: bytes
    headers: dict

    @property
    def text(self) -> str:
        return self.content.decode("utf-8", errors="replace")


class TransportError(Exception):
    """Non-2xx status or connection failure inside a transport."""


def requests_transport(session: requests.Session | None = None,
                       timeout_s: float = 30.0) -> Callable[[str], FetchResult]:
    session = session or requests.Session()

    def fetch(url: str) -> FetchResult:
        try:
            resp = session.get(url, timeout=timeout_s,
                               headers={"User-Agent": USER_AGENT})
        except requests.RequestException as exc:
            raise TransportError(str(exc)) from exc
        if resp.status_code >= 400:
            raise TransportError(f"HTTP {resp.status_code} for {url}")
        return FetchResult(url=url, status=resp.status_code,
                           content=resp.content, headers=dict(resp.headers))

    return fetch


class WebClient:
    """GET with retry and rate limiting; raises FetchFailed when retries run out."""

    def __init__(self, transport: Callable[[str], FetchResult] | None = None,
                 retry: RetryPolicy | None = None,
                 limiter: RateLimiter | None = None,
                 sleep: Callable[[float], None] = time.sleep):
        self.transport = transport or requests_transport()
        self.retry = retry or RetryPolicy()
        self.limiter = limiter
        self.sleep = sleep

    def get(self, url: str) -> FetchResult:
        def attempt() -> FetchResult:
            if self.limiter is not None:
                self.limiter.acquire()
            return self.transport(url)

        try:
            return with_retry(attempt, self.retry, sleep=self.sleep)
        except RetriesExhausted as exc:
            raise FetchFailed(
                f"GET {url} failed after {exc.attempts} attempts: {exc.last_error}",
                attempts=exc.attempts,
                last_error=exc.last_error,
            ) from exc
