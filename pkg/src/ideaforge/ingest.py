"""Corpus ingestion: conference listings, title shortlisting, PDF resolution,
review harvesting, and the on-disk paper store.

Conference adapters are data-driven (a listing URL plus per-hop anchor
patterns) rather than code per site. Everything network-facing goes through
WebClient, so tests run fully offline against injected transports.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import re
from dataclasses import dataclass, field
from html.parser import HTMLParser
from pathlib import Path
from typing import Sequence
from urllib.parse import urljoin, urlparse

from . import pdftext
from .clock import Clock
from .errors import (
    EmptyDirectory,
    HopLimitExceeded,
    ParseFailed,
    PdfUnreadable,
    SelectionInvalid,
)
from .net import WebClient
from .providers import ChatRequest, ProviderGateway

log = logging.getLogger(__name__)

MAX_HOPS = 3
PAGE_SEPARATOR = "\f"

STATUS_INGESTED = "ingested"
STATUS_SKIPPED = "skipped:pdf-unreadable"


@dataclass(frozen=True)
class ConferenceSource:
    name: str
    listing_url: str
    link_hop_rules: tuple[str, ...]  # regex per hop; rule 0 selects listing anchors
    review_site: str | None = None   # URL pattern with {key}, e.g. ".../reviews/{key}.json"

    def __post_init__(self):
        if len(self.link_hop_rules) > MAX_HOPS:
            raise ValueError(f"at most {MAX_HOPS} hop rules are supported")
        object.__setattr__(self, "link_hop_rules", tuple(self.link_hop_rules))


@dataclass
class PaperRecord:
    id: str
    title: str
    conference: str
    pdf_url: str
    full_text: str
    review_texts: list[str] = field(default_factory=list)
    fetched_at: float = 0.0
    status: str = STATUS_INGESTED


@dataclass(frozen=True)
class ShortlistPolicy:
    window: int = 250
    pick: int = 25

    def __post_init__(self):
        if self.window <= 0 or self.pick <= 0:
            raise ValueError("window and pick must be positive")
        if self.pick > self.window:
            raise ValueError("pick must be <= window")


def paper_id_for(pdf_url: str) -> str:
    """Stable id: hash of the canonical (stripped) url."""
    return hashlib.sha256(pdf_url.strip().encode("utf-8")).hexdigest()[:16]


class _AnchorCollector(HTMLParser):
    def __init__(self):
        super().__init__()
        self.anchors: list[tuple[str, str]] = []  # (href, text)
        self._href: str | None = None
        self._text: list[str] = []

    def handle_starttag(self, tag, attrs):
        if tag == "a":
            self._href = dict(attrs).get("href")
            self._text = []

    def handle_data(self, data):
        if self._href is not None:
            self._text.append(data)

    def handle_endtag(self, tag):
        if tag == "a" and self._href is not None:
            text = re.sub(r"\s+", " ", "".join(self._text)).strip()
            self.anchors.append((self._href, text))
            self._href = None


def _anchors(html: str) -> list[tuple[str, str]]:
    collector = _AnchorCollector()
    collector.feed(html)
    return collector.anchors


def list_accepted_papers(source: ConferenceSource,
                         web: WebClient) -> list[tuple[str, str]]:
    """(title, absolute link) for every anchor matching hop rule 0, deduplicated."""
    page = web.get(source.listing_url)
    rule = re.compile(source.link_hop_rules[0])
    seen: set[str] = set()
    out: list[tuple[str, str]] = []
    for href, text in _anchors(page.text):
        absolute = urljoin(source.listing_url, href)
        if not (rule.search(href) or rule.search(absolute)):
            continue
        if absolute in seen:
            continue
        seen.add(absolute)
        out.append((text, absolute))
    if not out:
        raise ParseFailed(f"no anchors matched {source.link_hop_rules[0]!r} "
                          f"on {source.listing_url}")
    return out


def _looks_like_pdf(url: str) -> bool:
    path = urlparse(url).path.lower()
    return path.endswith(".pdf") or "/pdf" in path


def resolve_pdf(link: str, source: ConferenceSource, web: WebClient) -> str:
    """Follow intermediate pages (hop rules beyond rule 0) until a PDF URL."""
    rules = [re.compile(r) for r in source.link_hop_rules[1:]]
    url = link
    if not rules:
        return url
    for hop in range(MAX_HOPS):
        if _looks_like_pdf(url):
            return url
        page = web.get(url)
        rule = rules[min(hop, len(rules) - 1)]
        nxt = None
        for href, _text in _anchors(page.text):
            absolute = urljoin(url, href)
            if rule.search(href) or rule.search(absolute):
                nxt = absolute
                break
        if nxt is None:
            raise ParseFailed(f"no anchor matched {rule.pattern!r} on {url}")
        url = nxt
    if _looks_like_pdf(url):
        return url
    raise HopLimitExceeded(f"still no PDF after {MAX_HOPS} hops from {link}")


def fetch_pdf_text(pdf_url: str, web: WebClient | None = None) -> str:
    """Page texts joined by form-feed; PdfUnreadable when nothing is extractable."""
    if pdf_url.startswith("file://") or "://" not in pdf_url:
        path = pdf_url[len("file://"):] if pdf_url.startswith("file://") else pdf_url
        data = Path(path).read_bytes()
    else:
        data = (web or WebClient()).get(pdf_url).content
    pages = pdftext.extract_pages(data)
    if all(not p.strip() for p in pages):
        raise PdfUnreadable(f"no extractable text in {pdf_url}")
    return PAGE_SEPARATOR.join(pages)


def harvest_reviews(record: PaperRecord, source: ConferenceSource,
                    web: WebClient) -> list[str]:
    """Review texts from the source's review site; failures are non-fatal."""
    if not source.review_site:
        return []
    key = Path(urlparse(record.pdf_url).path).stem
    url = source.review_site.format(key=key)
    try:
        page = web.get(url)
        payload = json.loads(page.text)
        reviews = [str(r) for r in payload.get("reviews", [])]
    except Exception as exc:  # noqa: BLE001 - reviews are best-effort
        log.warning("reviews unavailable for %s (%s): %s", record.id, url, exc)
        return []
    return reviews


_LINE_PREFIX = re.compile(r"^\s*(?:\d+[.)]\s*|[-*•]\s*)?")


def _strip_line(line: str) -> str:
    return _LINE_PREFIX.sub("", line).strip()


def shortlist_titles(titles: Sequence[str], policy: ShortlistPolicy,
                     gateway: ProviderGateway) -> list[str]:
    """Window the titles, ask the LLM for the most relevant per window.

    Short final windows scale the pick count to ceil(pick * n / window). A
    selection naming titles outside the window (or the wrong count) is retried
    once, then replaced by the first-k titles of the window.
    """
    if not titles:
        raise ValueError("titles must be non-empty")
    selected: list[str] = []
    for start in range(0, len(titles), policy.window):
        window = list(titles[start:start + policy.window])
        target = math.ceil(policy.pick * len(window) / policy.window)
        indices = None
        for _attempt in range(2):
            try:
                indices = _ask_window(window, target, gateway)
                break
            except SelectionInvalid as exc:
                log.warning("shortlist selection rejected: %s", exc)
        if indices is None:
            indices = list(range(target))
        selected.extend(window[i] for i in sorted(indices))
    return selected


def _ask_window(window: list[str], target: int,
                gateway: ProviderGateway) -> list[int]:
    listing = "\n".join(f"{i + 1}. {t}" for i, t in enumerate(window))
    request = ChatRequest(
        system_prompt="You select conference papers by title.",
        user_prompt=(
            f"From the numbered list of paper titles below, select the {target} "
            "most relevant and novel papers. Reply with one selected title per "
            f"line, exactly as written.\n\n{listing}"
        ),
    )
    response = gateway.chat(request)
    by_title = {t.casefold(): i for i, t in reversed(list(enumerate(window)))}
    picked: list[int] = []
    for line in response.text.splitlines():
        cleaned = _strip_line(line)
        if not cleaned:
            continue
        index = by_title.get(cleaned.casefold())
        if index is None:
            raise SelectionInvalid(f"title not in window: {cleaned!r}")
        if index not in picked:
            picked.append(index)
    if len(picked) != target:
        raise SelectionInvalid(f"expected {target} titles, got {len(picked)}")
    return picked


class PaperStore:
    """Append-only papers.jsonl with full text offloaded to texts/<id>.txt."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.path = self.root / "papers.jsonl"
        self.texts_dir = self.root / "texts"
        self._records: dict[str, PaperRecord] = {}
        self._load()

    def _load(self):
        if not self.path.is_file():
            return
        with open(self.path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                row = json.loads(line)
                text_path = row.pop("full_text_path", None)
                full_text = row.pop("full_text", "")
                if text_path:
                    full_text = (self.root / text_path).read_text(encoding="utf-8")
                record = PaperRecord(full_text=full_text, **row)
                self._records[record.id] = record

    def __len__(self) -> int:
        return len(self._records)

    def __contains__(self, paper_id: str) -> bool:
        return paper_id in self._records

    def get(self, paper_id: str) -> PaperRecord | None:
        return self._records.get(paper_id)

    def records(self) -> list[PaperRecord]:
        return list(self._records.values())

    def add(self, record: PaperRecord) -> bool:
        """Append if new; re-adding an existing id is a no-op (idempotent)."""
        if record.id in self._records:
            return False
        self.texts_dir.mkdir(parents=True, exist_ok=True)
        rel = f"texts/{record.id}.txt"
        (self.root / rel).write_text(record.full_text, encoding="utf-8")
        row = {
            "id": record.id,
            "title": record.title,
            "conference": record.conference,
            "pdf_url": record.pdf_url,
            "review_texts": record.review_texts,
            "fetched_at": record.fetched_at,
            "status": record.status,
            "full_text_path": rel,
        }
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
        self._records[record.id] = record
        return True


def ingest_local(path: Path | str, store: PaperStore, clock: Clock,
                 conference: str = "local") -> list[PaperRecord]:
    """One record per .txt/.pdf file; title from a <stem>.meta.json sidecar
    when present, else the filename stem."""
    directory = Path(path)
    files = sorted(p for p in directory.glob("*")
                   if p.suffix.lower() in (".txt", ".pdf"))
    if not files:
        raise EmptyDirectory(str(directory))
    records: list[PaperRecord] = []
    for file in files:
        sidecar = file.with_name(file.stem + ".meta.json")
        title = file.stem
        conf = conference
        reviews: list[str] = []
        if sidecar.is_file():
            meta = json.loads(sidecar.read_text(encoding="utf-8"))
            title = meta.get("title", title)
            conf = meta.get("conference", conf)
            reviews = [str(r) for r in meta.get("reviews", [])]
        url = f"local://{file.name}"
        status = STATUS_INGESTED
        if file.suffix.lower() == ".txt":
            full_text = file.read_text(encoding="utf-8")
        else:
            try:
                full_text = fetch_pdf_text(str(file))
            except PdfUnreadable as exc:
                log.warning("skipping %s: %s", file.name, exc)
                full_text = ""
                status = STATUS_SKIPPED
        record = PaperRecord(
            id=paper_id_for(url), title=title, conference=conf, pdf_url=url,
            full_text=full_text, review_texts=reviews,
            fetched_at=clock.now(), status=status,
        )
        store.add(record)
        records.append(record)
    return records


def ingest_source(source: ConferenceSource, store: PaperStore,
                  gateway: ProviderGateway, web: WebClient, clock: Clock,
                  policy: ShortlistPolicy | None = None,
                  limit: int | None = None) -> list[PaperRecord]:
    """Full listing-to-store pipeline for one conference source."""
    policy = policy or ShortlistPolicy()
    listing = list_accepted_papers(source, web)
    titles = [t for t, _link in listing]
    keep = set(shortlist_titles(titles, policy, gateway))
    chosen = [(t, link) for t, link in listing if t in keep]
    if limit is not None:
        chosen = chosen[:limit]

    records: list[PaperRecord] = []
    for title, link in chosen:
        pdf_url = resolve_pdf(link, source, web)
        paper_id = paper_id_for(pdf_url)
        if paper_id in store:
            records.append(store.get(paper_id))
            continue
        status = STATUS_INGESTED
        try:
            full_text = fetch_pdf_text(pdf_url, web)
        except PdfUnreadable as exc:
            log.warning("skipping %s: %s", pdf_url, exc)
            full_text = ""
            status = STATUS_SKIPPED
        record = PaperRecord(
            id=paper_id, title=title, conference=source.name, pdf_url=pdf_url,
            full_text=full_text, fetched_at=clock.now(), status=status,
        )
        record.review_texts = harvest_reviews(record, source, web)
        store.add(record)
        records.append(record)
    return records
