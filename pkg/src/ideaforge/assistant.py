"""Corpus-grounded question answering and whole-paper summarization."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import EmptyCollection
from .ingest import PaperRecord
from .providers import ChatRequest, ProviderGateway
from .topictree import QA_SYSTEM_PROMPT, retrieve_for_prompt
from .vectorstore import Collection

QA_CHUNKS = 6
SUMMARY_INSTRUCTION = "Summarize the research paper in around 100 words.\n\n"


@dataclass
class Answer:
    question: str
    text: str
    source_ids: list[str] = field(default_factory=list)


def answer_question(question: str, collection: Collection,
                    gateway: ProviderGateway) -> Answer:
    if not question:
        raise ValueError("question must be non-empty")
    if len(collection) == 0:
        raise EmptyCollection(collection.name)
    hits = retrieve_for_prompt(collection, question, QA_CHUNKS,
                               gateway, QA_SYSTEM_PROMPT, question)
    response = gateway.chat(ChatRequest(
        system_prompt=QA_SYSTEM_PROMPT,
        user_prompt=question,
        context_docs=tuple(h.text for h in hits),
    ))
    return Answer(question=question, text=response.text,
                  source_ids=[h.entry_id for h in hits])


def summarize(record: PaperRecord, gateway: ProviderGateway) -> str:
    """Single stuffed-prompt call; oversized papers keep their head and lose
    the tail so the request stays inside the token budget."""
    if not record.full_text:
        raise ValueError("record has no full text")
    budget = gateway.budget
    overhead = len(SUMMARY_INSTRUCTION)
    available = budget.max_chars() - overhead
    text = record.full_text[:max(available, 0)]
    response = gateway.chat(ChatRequest(
        system_prompt="",
        user_prompt=SUMMARY_INSTRUCTION + text,
    ))
    return response.text
