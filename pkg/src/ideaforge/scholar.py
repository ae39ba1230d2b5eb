"""Client for a Semantic-Scholar-shaped Graph API: title search, reference and
citation listings with offset/limit pagination, and abstract retrieval.

Dispatch is rate-limited (default 1 request/second) and retried; tests point
base_url at a local fixture server speaking the same wire format.
"""

from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass
from typing import Callable
from urllib.parse import quote

import requests

from .errors import ApiError, NotFound, RetriesExhausted
from .providers import RateLimiter, RetryPolicy, with_retry

log = logging.getLogger(__name__)

API_KEY_ENV = "S2_API_KEY"
PAGE_LIMIT = 100


@dataclass(frozen=True)
class ScholarPaper:
    paper_id: str
    title: str
    abstract: str | None = None

    def __post_init__(self):
        if not self.paper_id:
            raise ValueError("paper_id must be non-empty")


class ScholarClient:
    def __init__(self, base_url: str = "https://api.semanticscholar.org",
                 min_interval_s: float = 1.0,
                 retry: RetryPolicy | None = None,
                 session: requests.Session | None = None,
                 sleep: Callable[[float], None] = time.sleep,
                 timeout_s: float = 30.0):
        self.base_url = base_url.rstrip("/")
        self.retry = retry or RetryPolicy()
        self.session = session or requests.Session()
        self.sleep = sleep
        self.timeout_s = timeout_s
        self.limiter = RateLimiter(requests_per_window=1, window_s=min_interval_s,
                                   sleep=sleep)

    def _headers(self) -> dict:
        key = os.environ.get(API_KEY_ENV)
        return {"x-api-key": key} if key else {}

    def _get(self, path: str, params: dict | None = None) -> dict:
        url = f"{self.base_url}{path}"

        def attempt() -> dict:
            self.limiter.acquire()
            resp = self.session.get(url, params=params, headers=self._headers(),
                                    timeout=self.timeout_s)
            if resp.status_code == 404:
                raise NotFound(url)
            if resp.status_code >= 400:
                raise ApiError(f"HTTP {resp.status_code} for {url}")
            try:
                return resp.json()
            except json.JSONDecodeError as exc:
                raise ApiError(f"non-JSON body from {url}") from exc

        try:
            return with_retry(attempt, self.retry, sleep=self.sleep)
        except RetriesExhausted as exc:
            if isinstance(exc.last_error, NotFound):
                raise exc.last_error
            raise ApiError(f"{url} failed after {exc.attempts} attempts: "
                           f"{exc.last_error}") from exc

    def find_paper_id(self, title: str) -> ScholarPaper:
        """Best title-search match; an exact case-insensitive title wins."""
        if not title:
            raise ValueError("title must be non-empty")
        body = self._get(
            "/graph/v1/paper/search",
            params={"query": title, "fields": "title,abstract"},
        )
        data = body.get("data") or []
        if not data:
            raise NotFound(f"no search results for {title!r}")
        wanted = title.strip().casefold()
        chosen = next(
            (row for row in data if (row.get("title") or "").strip().casefold() == wanted),
            data[0],
        )
        return ScholarPaper(
            paper_id=chosen["paperId"],
            title=chosen.get("title") or "",
            abstract=chosen.get("abstract"),
        )

    def fetch_links(self, paper_id: str, direction: str) -> list[ScholarPaper]:
        """All references or citations of a paper, paginated transparently."""
        if direction not in ("references", "citations"):
            raise ValueError("direction must be 'references' or 'citations'")
        wrapper = "citedPaper" if direction == "references" else "citingPaper"
        out: list[ScholarPaper] = []
        offset = 0
        while True:
            body = self._get(
                f"/graph/v1/paper/{quote(paper_id)}/{direction}",
                params={"fields": "title,abstract", "offset": offset,
                        "limit": PAGE_LIMIT},
            )
            data = body.get("data") or []
            for row in data:
                inner = row.get(wrapper) or {}
                if inner.get("paperId"):
                    out.append(ScholarPaper(
                        paper_id=inner["paperId"],
                        title=inner.get("title") or "",
                        abstract=inner.get("abstract"),
                    ))
            if "next" in body and body["next"] is not None:
                offset = int(body["next"])
            elif len(data) == PAGE_LIMIT:
                offset += PAGE_LIMIT
            else:
                break
        return out

    def fetch_abstracts(self, papers: list[ScholarPaper]) -> list[ScholarPaper]:
        """Fill missing abstracts; papers without one are dropped; duplicates
        collapse to their first occurrence."""
        if not papers:
            raise ValueError("papers must be non-empty")
        seen: set[str] = set()
        out: list[ScholarPaper] = []
        for paper in papers:
            if paper.paper_id in seen:
                continue
            seen.add(paper.paper_id)
            abstract = paper.abstract
            if abstract is None:
                try:
                    body = self._get(f"/graph/v1/paper/{quote(paper.paper_id)}",
                                     params={"fields": "title,abstract"})
                except NotFound:
                    continue
                abstract = body.get("abstract")
            if abstract:
                out.append(ScholarPaper(paper.paper_id, paper.title, abstract))
        return out
