"""Topic-pair selection and initial abstract generation.

Pair selection is pure and deterministic: the distant mode brute-forces every
cross-topic pair of representative documents (a source paper's first chunk
vector) and keeps the farthest pair, with lexicographic tie-breaking.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .clock import Clock
from .errors import GenerationEmpty, InsufficientTopics, MissingEmbeddings
from .providers import ChatRequest, ProviderGateway
from .topictree import TopicTree
from .vectorstore import Collection, Metric, distance

CONTEXT_CHUNKS_PER_TOPIC = 4

STAGE_INITIAL = "initial"
STAGE_POLISHED = "polished"
STAGE_COMBINED = "combined"


@dataclass(frozen=True)
class TopicPair:
    first: int
    second: int
    selection_mode: str  # distant | random | manual | exhaustive
    witness: tuple[str, str, float] | None = None

    def __post_init__(self):
        if not 0 <= self.first < self.second:
            raise ValueError("pair indices must satisfy 0 <= first < second")

    def to_dict(self) -> dict:
        payload = {
            "first": self.first,
            "second": self.second,
            "selection_mode": self.selection_mode,
        }
        if self.witness is not None:
            payload["witness"] = list(self.witness)
        return payload

    @classmethod
    def from_dict(cls, payload: dict) -> "TopicPair":
        witness = payload.get("witness")
        return cls(
            first=payload["first"],
            second=payload["second"],
            selection_mode=payload["selection_mode"],
            witness=tuple(witness) if witness else None,
        )


@dataclass
class LineageEntry:
    op: str
    fingerprint: str
    at: float

    def to_dict(self) -> dict:
        return {"op": self.op, "fingerprint": self.fingerprint, "at": self.at}


@dataclass
class IdeaRecord:
    id: str
    pair: TopicPair
    abstract: str
    title: str | None = None
    stage: str = STAGE_INITIAL
    lineage: list[LineageEntry] = field(default_factory=list)
    parent_ids: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "pair": self.pair.to_dict(),
            "abstract": self.abstract,
            "title": self.title,
            "stage": self.stage,
            "lineage": [e.to_dict() for e in self.lineage],
            "parent_ids": list(self.parent_ids),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "IdeaRecord":
        return cls(
            id=payload["id"],
            pair=TopicPair.from_dict(payload["pair"]),
            abstract=payload["abstract"],
            title=payload.get("title"),
            stage=payload["stage"],
            lineage=[LineageEntry(e["op"], e["fingerprint"], e["at"])
                     for e in payload["lineage"]],
            parent_ids=list(payload.get("parent_ids", [])),
        )


def idea_id(stage: str, pair: TopicPair, fingerprint: str, text: str,
            parent_ids: tuple[str, ...] = ()) -> str:
    """Content-derived id, stable across runs with the same provider script."""
    payload = "|".join([
        stage, f"{pair.first},{pair.second}", fingerprint,
        hashlib.sha256(text.encode("utf-8")).hexdigest(), ",".join(parent_ids),
    ])
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


class IdeaStore:
    """Append-only ideas.jsonl, idempotent on idea id."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.path = self.root / "ideas.jsonl"
        self._records: dict[str, IdeaRecord] = {}
        if self.path.is_file():
            with open(self.path, encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        record = IdeaRecord.from_dict(json.loads(line))
                        self._records[record.id] = record

    def __len__(self) -> int:
        return len(self._records)

    def get(self, idea_id_: str) -> IdeaRecord | None:
        return self._records.get(idea_id_)

    def records(self) -> list[IdeaRecord]:
        return list(self._records.values())

    def add(self, record: IdeaRecord) -> bool:
        if record.id in self._records:
            return False
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record.to_dict(), ensure_ascii=False) + "\n")
        self._records[record.id] = record
        return True


def _representatives(tree: TopicTree, collection: Collection) -> list[list[str]]:
    """Per topic: attributed source paper ids whose first chunk is embedded."""
    reps: list[list[str]] = []
    for topic in tree.topics:
        docs = list(dict.fromkeys(topic.source_links))
        for doc in docs:
            if f"{doc}:0" not in collection:
                raise MissingEmbeddings(f"no first-chunk vector for paper {doc}")
        reps.append(sorted(docs))
    return reps


def find_distant_pair(tree: TopicTree, collection: Collection,
                      metric: Metric | None = None) -> TopicPair:
    """Topic pair holding the maximum-distance cross-topic document pair.

    Ties prefer the smallest (first, second) topic pair, then the smallest
    (doc, doc) id pair.
    """
    populated = [t for t in tree.topics if t.source_links]
    if len(populated) < 2:
        raise InsufficientTopics("need at least 2 topics with sources")
    metric = metric or collection.metric
    reps = _representatives(tree, collection)

    best: tuple[int, int, str, str, float] | None = None
    for i in range(len(tree.topics)):
        for j in range(i + 1, len(tree.topics)):
            for doc_a in reps[i]:
                for doc_b in reps[j]:
                    d = distance(
                        collection.get_vector(f"{doc_a}:0"),
                        collection.get_vector(f"{doc_b}:0"),
                        metric,
                    )
                    if best is None or d > best[4]:
                        best = (i, j, doc_a, doc_b, d)
    if best is None:
        raise InsufficientTopics("no cross-topic document pair available")
    i, j, doc_a, doc_b, d = best
    return TopicPair(first=i, second=j, selection_mode="distant",
                     witness=(doc_a, doc_b, d))


def random_pair(tree: TopicTree, seed: int) -> TopicPair:
    """Uniform draw over the C(n,2) unordered pairs, reproducible per seed."""
    n = len(tree.topics)
    if n < 2:
        raise InsufficientTopics("need at least 2 topics")
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    i, j = random.Random(seed).choice(pairs)
    return TopicPair(first=i, second=j, selection_mode="random")


def all_pairs(tree: TopicTree) -> list[TopicPair]:
    n = len(tree.topics)
    if n < 2:
        raise InsufficientTopics("need at least 2 topics")
    return [TopicPair(first=i, second=j, selection_mode="exhaustive")
            for i in range(n) for j in range(i + 1, n)]


def manual_pair(tree: TopicTree, first: int, second: int) -> TopicPair:
    n = len(tree.topics)
    if n < 2:
        raise InsufficientTopics("need at least 2 topics")
    if not (0 <= first < n and 0 <= second < n):
        raise ValueError(f"topic indices must be in [0, {n})")
    return TopicPair(first=first, second=second, selection_mode="manual")


def abstract_prompt(label_a: str, label_b: str, ablation_no_topics: bool = False) -> str:
    if ablation_no_topics:
        return (
            "Write a detailed research paper abstract. "
            "Be sure to generate new ideas in the process. "
            "Don't just reuse ideas from the context. Only output the abstract."
        )
    return (
        f"Write a detailed research paper abstract about {label_a} and {label_b}. "
        "Be sure to generate new ideas in the process. "
        "Don't just reuse ideas from the context. Only output the abstract."
    )


def topic_context(pair: TopicPair, tree: TopicTree, collection: Collection,
                  gateway: ProviderGateway,
                  per_topic: int = CONTEXT_CHUNKS_PER_TOPIC) -> list[str]:
    """Exemplar chunks retrieved for both topic labels, first topic first."""
    docs: list[str] = []
    for index in (pair.first, pair.second):
        label = tree.topics[index].label
        probe = gateway.embed([label])[0]
        hits = collection.query(probe, k=min(per_topic, len(collection)))
        docs.extend(h.text for h in hits)
    return docs


def generic_context(collection: Collection, gateway: ProviderGateway,
                    query: str, k: int = 2 * CONTEXT_CHUNKS_PER_TOPIC) -> list[str]:
    probe = gateway.embed([query])[0]
    hits = collection.query(probe, k=min(k, len(collection)))
    return [h.text for h in hits]


def generate_abstract(pair: TopicPair, tree: TopicTree, collection: Collection,
                      gateway: ProviderGateway, clock: Clock,
                      ablation_no_topics: bool = False) -> IdeaRecord:
    label_a = tree.topics[pair.first].label
    label_b = tree.topics[pair.second].label
    prompt = abstract_prompt(label_a, label_b, ablation_no_topics)
    if ablation_no_topics:
        # ablation arm: nothing in the request may derive from the topic
        # labels, so retrieval keys on the generic prompt instead
        docs = generic_context(collection, gateway, prompt)
    else:
        docs = topic_context(pair, tree, collection, gateway)
    request = ChatRequest(
        system_prompt="You write research paper abstracts grounded in the provided context.",
        user_prompt=prompt,
        context_docs=tuple(docs),
    )
    response = gateway.chat(request)
    if not response.text.strip():
        raise GenerationEmpty("abstract generation returned empty text")
    record = IdeaRecord(
        id=idea_id(STAGE_INITIAL, pair, response.request_fingerprint, response.text),
        pair=pair,
        abstract=response.text,
        stage=STAGE_INITIAL,
        lineage=[LineageEntry("generate", response.request_fingerprint, clock.now())],
    )
    return record
