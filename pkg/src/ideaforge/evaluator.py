"""LLM-as-judge scoring (interestingness / novelty / feasibility, 1-10) and
similarity probability against a held-out corpus (0-1), plus the text report.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from .errors import UnparsableScores
from .ideation import IdeaRecord
from .providers import ChatRequest, ProviderGateway
from .vectorstore import Collection

SIMILARITY_CONTEXT = 6

RUBRIC = (
    "Interestingness rewards surprising, thought-provoking directions. "
    "Novelty rewards distance from established work. "
    "Feasibility rewards ideas a small lab could execute with current methods. "
    "Use the full 1-10 range."
)

_NUMBER = re.compile(r"-?\d+(?:\.\d+)?")


@dataclass(frozen=True)
class EvalScore:
    idea_id: str
    interestingness: float
    novelty: float
    feasibility: float
    judge_fingerprint: str

    def __post_init__(self):
        for value in (self.interestingness, self.novelty, self.feasibility):
            if not 1.0 <= value <= 10.0:
                raise ValueError(f"score {value} outside [1, 10]")


@dataclass(frozen=True)
class SimilarityScore:
    idea_id: str
    corpus_name: str
    probability: float

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError(f"probability {self.probability} outside [0, 1]")


def _judge_prompt(idea: IdeaRecord,
                  exemplars: Sequence[tuple[str, tuple[float, float, float]]]) -> ChatRequest:
    blocks = []
    for pos, (abstract, (i_score, n_score, f_score)) in enumerate(exemplars, start=1):
        blocks.append(
            f"Example {pos}:\n{abstract}\nRatings: interestingness {i_score}, "
            f"novelty {n_score}, feasibility {f_score}"
        )
    examples = "\n\n".join(blocks)
    return ChatRequest(
        system_prompt=("You judge research abstracts for interestingness, "
                       "novelty, and feasibility on a 1-10 scale. " + RUBRIC),
        user_prompt=(
            "Here are example abstracts with their ratings:\n\n" + examples +
            "\n\nRate the following abstract. Reply with three numbers in "
            "order: interestingness, novelty, feasibility.\n\n" + idea.abstract
        ),
        temperature=0.0,
    )


def judge_idea(idea: IdeaRecord,
               exemplars: Sequence[tuple[str, tuple[float, float, float]]],
               gateway: ProviderGateway) -> EvalScore:
    """Few-shot judged scores; malformed or out-of-range replies get one retry."""
    if not exemplars:
        raise ValueError("at least one exemplar is required")
    request = _judge_prompt(idea, exemplars)
    last_problem = ""
    for _attempt in range(2):
        response = gateway.chat(request)
        numbers = [float(m) for m in _NUMBER.findall(response.text)]
        if len(numbers) < 3:
            last_problem = f"found {len(numbers)} numbers, need 3"
            continue
        triple = numbers[:3]
        if any(not 1.0 <= v <= 10.0 for v in triple):
            last_problem = f"scores {triple} outside [1, 10]"
            continue
        return EvalScore(
            idea_id=idea.id,
            interestingness=triple[0],
            novelty=triple[1],
            feasibility=triple[2],
            judge_fingerprint=response.request_fingerprint,
        )
    raise UnparsableScores(f"judge reply unusable after retry: {last_problem}")


def similarity_probability(idea: IdeaRecord, corpus: Collection,
                           gateway: ProviderGateway) -> SimilarityScore:
    """Retrieval-grounded 0-1 similarity judgment; parsed leniently, clamped."""
    if len(corpus) == 0:
        raise ValueError("corpus must be non-empty")
    probe = gateway.embed([idea.abstract])[0]
    hits = corpus.query(probe, k=min(SIMILARITY_CONTEXT, len(corpus)))
    request = ChatRequest(
        system_prompt=("You rate how similar an abstract is to the papers in "
                       "the provided context."),
        user_prompt=(
            "Rate the similarity from 0 to 1 between the papers in context and "
            "the abstract below. Reply with a single number.\n\n" + idea.abstract
        ),
        context_docs=tuple(h.text for h in hits),
        temperature=0.0,
    )
    for _attempt in range(2):
        response = gateway.chat(request)
        match = _NUMBER.search(response.text)
        if match is None:
            continue
        value = min(max(float(match.group(0)), 0.0), 1.0)
        return SimilarityScore(idea_id=idea.id, corpus_name=corpus.name,
                               probability=value)
    raise UnparsableScores("similarity reply contained no number after retry")


def mean_scores(scores: Sequence[EvalScore]) -> tuple[float, float, float]:
    n = len(scores)
    return (
        sum(s.interestingness for s in scores) / n,
        sum(s.novelty for s in scores) / n,
        sum(s.feasibility for s in scores) / n,
    )


def report(scores: Sequence[EvalScore],
           sims: Sequence[SimilarityScore] = ()) -> str:
    """Two-decimal means, one block per metric family."""
    if not scores:
        raise ValueError("scores must be non-empty")
    n = len(scores)
    mean_i, mean_n, mean_f = mean_scores(scores)
    lines = [
        f"Idea scores (n={n})",
        f"  interestingness  {mean_i:.2f}",
        f"  novelty          {mean_n:.2f}",
        f"  feasibility      {mean_f:.2f}",
    ]
    by_corpus: dict[str, list[float]] = {}
    for sim in sims:
        by_corpus.setdefault(sim.corpus_name, []).append(sim.probability)
    for corpus_name in sorted(by_corpus):
        values = by_corpus[corpus_name]
        lines.append(f"Similarity vs {corpus_name} (n={len(values)})")
        lines.append(f"  mean probability {sum(values) / len(values):.2f}")
    return "\n".join(lines) + "\n"
