"""Grounding and refinement of generated ideas: reference harvesting, validity
checks, polishing, unique-idea selection, pairwise combination, automated peer
review, and experimental-procedure planning.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

from .clock import Clock
from .errors import (
    EmptyHarvest,
    InsufficientIdeas,
    MalformedPlan,
    NoReviewCorpus,
    NotFound,
    ProviderUnavailable,
)
from .ideation import (
    STAGE_COMBINED,
    STAGE_INITIAL,
    STAGE_POLISHED,
    IdeaRecord,
    LineageEntry,
    idea_id,
)
from .providers import ChatRequest, ProviderGateway
from .scholar import ScholarClient, ScholarPaper
from .topictree import TopicTree
from .vectorstore import Collection, Metric

log = logging.getLogger(__name__)

SEED_PAPERS_PER_IDEA = 5
VALIDITY_CONTEXT = 5
REVIEW_CONTEXT = 4
FALLBACK_NEIGHBORS = 5

# Sent verbatim, followed by the abstract being polished.
POLISH_PROMPT = (
    "Polish the abstract and the idea presented, and make it more valid if it "
    "is not already. Make sure to highly emphasize the details that make the "
    "research idea different from what's presented in the provided context, "
    "and draw a comparison between this method and methods mentioned in the "
    "context. If possible, increase the novelty of the abstract by drawing "
    "connections between it and details from the context. "
    "Make sure to include a title.\n\n"
)


@dataclass
class ValidityReport:
    idea_id: str
    verdict_text: str
    supporting_source_ids: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"type": "validity", "idea_id": self.idea_id,
                "verdict_text": self.verdict_text,
                "supporting_source_ids": list(self.supporting_source_ids)}


@dataclass
class ReviewReport:
    idea_id: str
    summary: str = ""
    strengths: str = ""
    weaknesses: str = ""
    conclusion: str = ""

    def to_dict(self) -> dict:
        return {"type": "review", "idea_id": self.idea_id,
                "summary": self.summary, "strengths": self.strengths,
                "weaknesses": self.weaknesses, "conclusion": self.conclusion}


@dataclass
class ProcedurePlan:
    idea_id: str
    steps: list[str]

    def to_dict(self) -> dict:
        return {"type": "procedure", "idea_id": self.idea_id,
                "steps": list(self.steps)}


class ReportStore:
    """Append-only reports.jsonl shared by validity, review, and procedure."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.path = self.root / "reports.jsonl"

    def add(self, report) -> None:
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(report.to_dict(), ensure_ascii=False) + "\n")

    def rows(self, type_: str | None = None, idea_id_: str | None = None) -> list[dict]:
        if not self.path.is_file():
            return []
        out = []
        with open(self.path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                row = json.loads(line)
                if type_ and row.get("type") != type_:
                    continue
                if idea_id_ and row.get("idea_id") != idea_id_:
                    continue
                out.append(row)
        return out


def seed_papers(idea: IdeaRecord, tree: TopicTree, collection: Collection,
                gateway: ProviderGateway,
                limit: int = SEED_PAPERS_PER_IDEA) -> list[str]:
    """Top retrieved context paper ids for the idea's topic pair."""
    ids: list[str] = []
    for index in (idea.pair.first, idea.pair.second):
        label = tree.topics[index].label
        probe = gateway.embed([label])[0]
        for hit in collection.query(probe, k=min(limit, len(collection))):
            pid = hit.metadata.get("paper_id", hit.entry_id)
            if pid not in ids:
                ids.append(pid)
    return ids[:limit]


def build_reference_collection(idea: IdeaRecord, tree: TopicTree,
                               collection: Collection, paper_store,
                               gateway: ProviderGateway,
                               scholar: ScholarClient) -> Collection:
    """Harvest references+citations of the idea's seed papers and embed their
    abstracts into a fresh per-idea collection (possibly empty)."""
    harvested: list[ScholarPaper] = []
    for pid in seed_papers(idea, tree, collection, gateway):
        record = paper_store.get(pid)
        if record is None:
            continue
        try:
            anchor = scholar.find_paper_id(record.title)
        except NotFound:
            log.warning("no scholarly match for %r", record.title)
            continue
        for direction in ("references", "citations"):
            harvested.extend(scholar.fetch_links(anchor.paper_id, direction))

    refs = Collection(f"references-{idea.id}", gateway.embed(["probe"])[0].dimension)
    if not harvested:
        return refs
    with_abstracts = scholar.fetch_abstracts(harvested)
    if not with_abstracts:
        return refs
    vectors = gateway.embed([p.abstract for p in with_abstracts])
    refs.add(
        (p.paper_id, vec, {"title": p.title}, p.abstract)
        for p, vec in zip(with_abstracts, vectors)
    )
    return refs


def _retrieve_refs(abstract: str, refs: Collection, k: int,
                   gateway: ProviderGateway):
    probe = gateway.embed([abstract])[0]
    return refs.query(probe, k=min(k, len(refs)))


def evaluate_validity(idea: IdeaRecord, refs: Collection,
                      gateway: ProviderGateway) -> ValidityReport:
    if len(refs) == 0:
        raise EmptyHarvest("no reference abstracts to evaluate against")
    hits = _retrieve_refs(idea.abstract, refs, VALIDITY_CONTEXT, gateway)
    response = gateway.chat(ChatRequest(
        system_prompt="You evaluate research abstracts against the provided papers.",
        user_prompt=("Evaluate the validity of the following abstract based on "
                     "the given papers.\n\n" + idea.abstract),
        context_docs=tuple(h.text for h in hits),
    ))
    return ValidityReport(
        idea_id=idea.id,
        verdict_text=response.text,
        supporting_source_ids=[h.entry_id for h in hits],
    )


_TITLE_LINE = re.compile(r"^\**\s*Title\s*:\s*(.+?)\s*\**$", re.IGNORECASE)


def split_title(text: str) -> tuple[str | None, str]:
    """Title from the first line when one is present, plus the remaining body."""
    lines = text.strip().splitlines()
    if not lines:
        return None, text
    first = lines[0].strip()
    match = _TITLE_LINE.match(first)
    if match:
        title = match.group(1)
    elif len(lines) > 1 and 0 < len(first) <= 120 and not first.endswith("."):
        title = first.strip("*# ").strip()
    else:
        return None, text
    body = "\n".join(lines[1:]).lstrip("\n")
    return title, body if body else text


def polish(idea: IdeaRecord, refs: Collection, gateway: ProviderGateway,
           clock: Clock) -> IdeaRecord:
    """One polish round grounded in reference abstracts; returns a new record
    parented to the input with one extra lineage entry."""
    if idea.stage not in (STAGE_INITIAL, STAGE_COMBINED, STAGE_POLISHED):
        raise ValueError(f"cannot polish stage {idea.stage!r}")
    context: tuple[str, ...] = ()
    if len(refs) > 0:
        hits = _retrieve_refs(idea.abstract, refs, VALIDITY_CONTEXT, gateway)
        context = tuple(h.text for h in hits)
    response = gateway.chat(ChatRequest(
        system_prompt="You polish research paper abstracts using the provided context.",
        user_prompt=POLISH_PROMPT + idea.abstract,
        context_docs=context,
    ))
    if not response.text.strip():
        raise ProviderUnavailable("polish returned empty text")
    title, body = split_title(response.text)
    new_id = idea_id(STAGE_POLISHED, idea.pair, response.request_fingerprint,
                     response.text, parent_ids=(idea.id,))
    return IdeaRecord(
        id=new_id,
        pair=idea.pair,
        abstract=body,
        title=title,
        stage=STAGE_POLISHED,
        lineage=idea.lineage + [LineageEntry("polish", response.request_fingerprint,
                                             clock.now())],
        parent_ids=[idea.id],
    )


def _fallback_ranking(ideas: list[IdeaRecord], refs: Collection,
                      gateway: ProviderGateway, k: int) -> list[IdeaRecord]:
    # mean cosine distance to the 5 nearest reference entries, descending;
    # ties keep input order
    if len(refs) == 0:
        return ideas[:k]
    scored: list[tuple[float, int]] = []
    for index, idea in enumerate(ideas):
        hits = _retrieve_refs(idea.abstract, refs, FALLBACK_NEIGHBORS, gateway)
        mean = sum(h.distance for h in hits) / len(hits)
        scored.append((-mean, index))
    scored.sort()
    return [ideas[index] for _neg, index in scored[:k]]


def select_unique(ideas: list[IdeaRecord], refs: Collection,
                  gateway: ProviderGateway, k: int) -> list[IdeaRecord]:
    """LLM-ranked top-k most unique ideas relative to the reference context,
    falling back to an embedding-distance ranking on unusable output."""
    if len(ideas) < k:
        raise InsufficientIdeas(f"need at least {k} ideas, have {len(ideas)}")
    listing = "\n\n".join(f"{i + 1}. {idea.abstract}" for i, idea in enumerate(ideas))
    request = ChatRequest(
        system_prompt="You rank research abstracts by how different they are "
                      "from the provided context.",
        user_prompt=(
            f"Name the top {k} most unique abstracts, the ones most different "
            "from the context. Reply with their numbers, most unique first.\n\n"
            + listing
        ),
        context_docs=tuple(refs.texts[:8]),
    )
    for _attempt in range(2):
        try:
            response = gateway.chat(request)
        except ProviderUnavailable:
            break
        numbers = [int(m) for m in re.findall(r"\d+", response.text)]
        picked: list[int] = []
        for num in numbers:
            index = num - 1
            if 0 <= index < len(ideas) and index not in picked:
                picked.append(index)
            if len(picked) == k:
                return [ideas[i] for i in picked]
        log.warning("unique-selection reply unusable, %d/%d valid picks",
                    len(picked), k)
    return _fallback_ranking(ideas, refs, gateway, k)


def combine_pairs(ideas: list[IdeaRecord], gateway: ProviderGateway,
                  clock: Clock) -> list[IdeaRecord]:
    """One merged idea per unordered pair: C(n,2) records, two parents each."""
    if len(ideas) < 2:
        raise InsufficientIdeas("need at least 2 ideas to combine")
    combined: list[IdeaRecord] = []
    for i in range(len(ideas)):
        for j in range(i + 1, len(ideas)):
            a, b = ideas[i], ideas[j]
            response = gateway.chat(ChatRequest(
                system_prompt="You merge pairs of research abstracts into one "
                              "unified research idea.",
                user_prompt=(
                    "Combine the following two research abstracts into a single "
                    "abstract proposing one unified idea. Emphasize novel "
                    "connections between the two. Only output the abstract."
                    f"\n\nAbstract 1:\n{a.abstract}\n\nAbstract 2:\n{b.abstract}"
                ),
            ))
            if not response.text.strip():
                raise ProviderUnavailable("combine returned empty text")
            new_id = idea_id(STAGE_COMBINED, a.pair, response.request_fingerprint,
                             response.text, parent_ids=(a.id, b.id))
            combined.append(IdeaRecord(
                id=new_id,
                pair=a.pair,
                abstract=response.text,
                stage=STAGE_COMBINED,
                lineage=[LineageEntry("combine", response.request_fingerprint,
                                      clock.now())],
                parent_ids=[a.id, b.id],
            ))
    return combined


_SECTION_RE = re.compile(
    r"\*{0,2}(Summary|Strengths|Weaknesses|Conclusion)\*{0,2}\s*:\*{0,2}",
    re.IGNORECASE,
)


def parse_review_sections(text: str) -> dict[str, str]:
    """Section header → body; headerless text lands whole under summary."""
    matches = list(_SECTION_RE.finditer(text))
    if not matches:
        return {"summary": text.strip()}
    sections: dict[str, str] = {}
    for pos, match in enumerate(matches):
        name = match.group(1).lower()
        end = matches[pos + 1].start() if pos + 1 < len(matches) else len(text)
        body = text[match.end():end].strip()
        sections.setdefault(name, body)
    return sections


def peer_review(idea: IdeaRecord, reviews: Collection,
                gateway: ProviderGateway) -> ReviewReport:
    """Automated review grounded in harvested review exemplars."""
    if reviews is None or len(reviews) == 0:
        raise NoReviewCorpus("no review corpus available")
    hits = _retrieve_refs(idea.abstract, reviews, REVIEW_CONTEXT, gateway)
    response = gateway.chat(ChatRequest(
        system_prompt="You write peer reviews in the style of the provided "
                      "example reviews.\n\n{context}",
        user_prompt=(
            "Write a peer review of the following research abstract. Structure "
            "it with **Summary:**, **Strengths:**, **Weaknesses:**, and "
            "**Conclusion:** sections.\n\n" + idea.abstract
        ),
        context_docs=tuple(h.text for h in hits),
    ))
    sections = parse_review_sections(response.text)
    return ReviewReport(
        idea_id=idea.id,
        summary=sections.get("summary", ""),
        strengths=sections.get("strengths", ""),
        weaknesses=sections.get("weaknesses", ""),
        conclusion=sections.get("conclusion", ""),
    )


_STEP_LINE = re.compile(r"^\s*\d+[.)]\s*(.*)$")


def parse_steps(text: str) -> list[str]:
    """Numbered steps, each possibly spanning continuation lines."""
    steps: list[str] = []
    current: str | None = None
    for line in text.splitlines():
        match = _STEP_LINE.match(line)
        if match:
            if current is not None and current.strip():
                steps.append(current.strip())
            current = match.group(1)
        elif current is not None and line.strip():
            current += " " + line.strip()
    if current is not None and current.strip():
        steps.append(current.strip())
    return steps


def generate_procedure(idea: IdeaRecord, collection: Collection | None,
                       gateway: ProviderGateway,
                       target_steps: int = 5) -> ProcedurePlan:
    """Numbered experimental-procedure steps; fewer than 3 parseable steps
    after one retry is MalformedPlan."""
    context: tuple[str, ...] = ()
    if collection is not None and len(collection) > 0:
        hits = _retrieve_refs(idea.abstract, collection, REVIEW_CONTEXT, gateway)
        context = tuple(h.text for h in hits)
    request = ChatRequest(
        system_prompt="You design experimental procedures for research ideas.",
        user_prompt=(
            f"Generate an experimental procedure for the research idea below "
            f"as a numbered list of about {target_steps} steps.\n\n"
            + idea.abstract
        ),
        context_docs=context,
    )
    for _attempt in range(2):
        response = gateway.chat(request)
        steps = parse_steps(response.text)
        if len(steps) >= 3:
            return ProcedurePlan(idea_id=idea.id, steps=steps)
    raise MalformedPlan("fewer than 3 parseable steps after retry")
