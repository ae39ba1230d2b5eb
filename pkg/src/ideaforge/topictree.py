"""Topic tree construction: frequent-topic extraction over the embedded
corpus, retrieval-grounded topic descriptions, and source attribution.

The tree is two levels deep: topics, each holding the ids of the papers whose
chunks were retrieved while describing it.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import MalformedTopicList
from .providers import ChatRequest, ProviderGateway
from .vectorstore import Collection

DEFAULT_TOPIC_COUNT = 5
DESCRIPTION_CHUNKS = 8
TOPIC_QUERY = "machine learning research topics"

# Retrieval-QA system prompt; {context} is filled with retrieved chunks.
QA_SYSTEM_PROMPT = (
    "You are an assistant for question-answering tasks. "
    "Use the following pieces of retrieved context to answer "
    "the question. If you don't know the answer, try your best."
    "Describe each response in a detailed manner, using as many pieces of evidence as possible."
    "{context}"
)


@dataclass
class Topic:
    index: int
    label: str
    description: str
    source_links: list[str] = field(default_factory=list)


@dataclass
class TopicTree:
    topics: list[Topic]
    built_from: str
    topic_count: int

    def to_dict(self) -> dict:
        return {
            "built_from": self.built_from,
            "topic_count": self.topic_count,
            "topics": [
                {
                    "index": t.index,
                    "label": t.label,
                    "description": t.description,
                    "source_links": list(t.source_links),
                }
                for t in self.topics
            ],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "TopicTree":
        return cls(
            topics=[Topic(t["index"], t["label"], t["description"],
                          list(t["source_links"]))
                    for t in payload["topics"]],
            built_from=payload["built_from"],
            topic_count=payload["topic_count"],
        )

    def save(self, path: Path | str):
        Path(path).write_text(
            json.dumps(self.to_dict(), ensure_ascii=False, indent=2) + "\n",
            encoding="utf-8",
        )

    @classmethod
    def load(cls, path: Path | str) -> "TopicTree":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


_LIST_LINE = re.compile(r"^\s*(?:\d+[.)]\s*|-\s*)(.+?)\s*$")


def parse_numbered_list(text: str) -> list[str]:
    """Items from 'N. label' or '- label' lines, order preserved."""
    items = []
    for line in text.splitlines():
        match = _LIST_LINE.match(line)
        if match:
            items.append(match.group(1))
    return items


def retrieve_for_prompt(collection: Collection, query: str, k: int,
                        gateway: ProviderGateway, system_prompt: str,
                        user_prompt: str) -> list:
    """Top-k hits for the query, trimmed to the docs the chat budget keeps."""
    probe = gateway.embed([query])[0]
    hits = collection.query(probe, k=min(k, len(collection)))
    kept = gateway.fit_context(ChatRequest(
        system_prompt=system_prompt,
        user_prompt=user_prompt,
        context_docs=tuple(h.text for h in hits),
    ))
    return hits[:len(kept)]


def extract_topics(collection: Collection, n: int,
                   gateway: ProviderGateway) -> list[str]:
    """Exactly n distinct topic labels, parsed from a numbered-list reply.

    One retry on malformed output, then MalformedTopicList.
    """
    if len(collection) == 0:
        raise ValueError("collection must be non-empty")
    user_prompt = (
        f"Generate the {n} most frequent topics using the research papers "
        "in the context. Output a numbered list of topic names only."
    )
    hits = retrieve_for_prompt(collection, TOPIC_QUERY, DESCRIPTION_CHUNKS,
                               gateway, QA_SYSTEM_PROMPT, user_prompt)
    request = ChatRequest(
        system_prompt=QA_SYSTEM_PROMPT,
        user_prompt=user_prompt,
        context_docs=tuple(h.text for h in hits),
    )
    for _attempt in range(2):
        response = gateway.chat(request)
        labels: list[str] = []
        for item in parse_numbered_list(response.text):
            if item not in labels:
                labels.append(item)
        if len(labels) >= n:
            return labels[:n]
    raise MalformedTopicList(f"could not parse {n} distinct topics")


def describe_topic(label: str, collection: Collection,
                   gateway: ProviderGateway) -> tuple[str, list[str]]:
    """LLM description of the topic plus the distinct source-paper ids of the
    retrieved chunks, in retrieval-rank order."""
    user_prompt = f"Describe {label} in a roughly 5-sentence paragraph."
    hits = retrieve_for_prompt(collection, label, DESCRIPTION_CHUNKS,
                               gateway, QA_SYSTEM_PROMPT, user_prompt)
    request = ChatRequest(
        system_prompt=QA_SYSTEM_PROMPT,
        user_prompt=user_prompt,
        context_docs=tuple(h.text for h in hits),
    )
    response = gateway.chat(request)
    sources: list[str] = []
    for hit in hits:
        paper_id = hit.metadata.get("paper_id", hit.entry_id)
        if paper_id not in sources:
            sources.append(paper_id)
    return response.text, sources


def build_tree(collection: Collection, n: int,
               gateway: ProviderGateway) -> TopicTree:
    labels = extract_topics(collection, n, gateway)
    topics = []
    for index, label in enumerate(labels):
        description, sources = describe_topic(label, collection, gateway)
        topics.append(Topic(index=index, label=label, description=description,
                            source_links=sources))
    return TopicTree(topics=topics, built_from=collection.name, topic_count=n)


def render_tree(tree: TopicTree, link_for=None) -> str:
    """Plain-text outline: topic label, then its numbered source links."""
    blocks = []
    for topic in tree.topics:
        lines = [topic.label]
        for i, source in enumerate(topic.source_links, start=1):
            link = link_for(source) if link_for else source
            lines.append(f"{i}. {link}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks)
