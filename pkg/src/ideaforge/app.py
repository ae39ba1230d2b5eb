"""Application context: builds providers and stores from config and exposes
every pipeline operation the CLI and HTTP service share.
"""

from __future__ import annotations

import json
from pathlib import Path

from . import assistant, evaluator, ideation, refine, topictree
from .clock import Clock, LogicalClock
from .config import AppConfig
from .errors import NotFound, StoreUninitialized, UsageError
from .ideation import IdeaRecord, IdeaStore
from .ingest import (
    STATUS_INGESTED,
    PaperStore,
    ShortlistPolicy,
    ingest_local,
    ingest_source,
)
from .net import WebClient
from .providers import (
    HashEmbedder,
    HttpChatProvider,
    HttpEmbedder,
    MockChatProvider,
    ProviderGateway,
    RateLimiter,
    RetryPolicy,
    TokenBudget,
)
from .refine import ReportStore
from .scholar import ScholarClient
from .topictree import TopicTree
from .vectorstore import ChunkingPolicy, Collection, VectorStore, split_text

MAIN_COLLECTION = "main"
REVIEWS_COLLECTION = "reviews"
TREE_FILE = "topic_tree.json"


def _load_script(path: str | None) -> list[tuple[str, str]]:
    if not path:
        return []
    rows = json.loads(Path(path).read_text(encoding="utf-8"))
    return [(row["pattern"], row["response"]) for row in rows]


class AppContext:
    def __init__(self, cfg: AppConfig):
        self.cfg = cfg
        self.clock: Clock = LogicalClock() if cfg.deterministic else Clock()
        self.retry = RetryPolicy(cfg.max_retries, cfg.backoff_base_ms)
        self.chunking = ChunkingPolicy(chunk_size=cfg.chunk_size,
                                       overlap=cfg.chunk_overlap)
        self.gateway = self._build_gateway()
        self.web = WebClient(retry=self.retry)
        self.scholar = ScholarClient(
            base_url=cfg.scholar.base_url,
            min_interval_s=cfg.scholar.min_interval_s,
            retry=self.retry,
        )
        cfg.store_dir.mkdir(parents=True, exist_ok=True)
        self.papers = PaperStore(cfg.store_dir)
        self.vectors = VectorStore(cfg.store_dir / "collections")
        self.ideas = IdeaStore(cfg.store_dir)
        self.reports = ReportStore(cfg.store_dir)

    def _build_gateway(self) -> ProviderGateway:
        cfg = self.cfg
        budget = TokenBudget(cfg.provider.budget_tokens, cfg.provider.chars_per_token)
        limiter = RateLimiter(cfg.rate_requests_per_window, cfg.rate_window_s)
        if cfg.provider.kind == "mock":
            chat = MockChatProvider(_load_script(cfg.provider.script))
            embed = HashEmbedder(cfg.provider.embed_dimension)
            sleep = (lambda _s: None) if cfg.deterministic else None
            return ProviderGateway(
                chat_provider=chat, embedder=embed, budget=budget,
                retry=self.retry, limiter=limiter,
                **({"sleep": sleep} if sleep else {}),
            )
        if cfg.provider.kind == "http":
            return ProviderGateway(
                chat_provider=HttpChatProvider(cfg.provider.base_url,
                                               cfg.provider.chat_model),
                embedder=HttpEmbedder(cfg.provider.base_url,
                                      cfg.provider.embed_model),
                budget=budget, retry=self.retry, limiter=limiter,
            )
        raise UsageError(f"unknown provider kind {cfg.provider.kind!r}")

    # collections

    def _embed_dimension(self) -> int:
        return self.gateway.embed(["dimension probe"])[0].dimension

    def main_collection(self, must_exist: bool = True) -> Collection:
        if self.vectors.exists(MAIN_COLLECTION):
            return self.vectors.load(MAIN_COLLECTION)
        if must_exist:
            raise StoreUninitialized("main collection missing; run ingest first")
        return Collection(MAIN_COLLECTION, self._embed_dimension())

    def reviews_collection(self) -> Collection:
        if self.vectors.exists(REVIEWS_COLLECTION):
            return self.vectors.load(REVIEWS_COLLECTION)
        return Collection(REVIEWS_COLLECTION, self._embed_dimension())

    def embed_corpus(self) -> dict:
        """Split and embed ingested papers into `main`, reviews into `reviews`.
        Idempotent: existing entry ids are skipped."""
        main = self.main_collection(must_exist=False)
        reviews = self.reviews_collection()
        added_chunks = 0
        added_reviews = 0
        for record in self.papers.records():
            if record.status != STATUS_INGESTED or not record.full_text:
                continue
            chunks = [c for c in split_text(record.full_text, self.chunking,
                                            paper_id=record.id)
                      if c.entry_id not in main]
            if chunks:
                vectors = self.gateway.embed([c.text for c in chunks])
                main.add_chunks(chunks, vectors, conference=record.conference)
                added_chunks += len(chunks)
            for index, review in enumerate(record.review_texts):
                entry_id = f"{record.id}:r{index}"
                if entry_id in reviews or not review.strip():
                    continue
                vector = self.gateway.embed([review])[0]
                reviews.add([(entry_id, vector,
                              {"paper_id": record.id, "seq": index}, review)])
                added_reviews += 1
        self.vectors.persist(main)
        self.vectors.persist(reviews)
        return {"chunks": added_chunks, "reviews": added_reviews}

    # tree

    def tree_path(self) -> Path:
        return self.cfg.store_dir / TREE_FILE

    def load_tree(self) -> TopicTree:
        path = self.tree_path()
        if not path.is_file():
            raise StoreUninitialized("no topic tree; run `tree build` first")
        return TopicTree.load(path)

    # operations

    def op_ingest(self, local_dir: str | None = None, source: str | None = None,
                  limit: int | None = None) -> dict:
        if bool(local_dir) == bool(source):
            raise UsageError("ingest needs exactly one of --local or --source")
        if local_dir:
            records = ingest_local(local_dir, self.papers, self.clock)
        else:
            if source not in self.cfg.sources:
                raise UsageError(f"unknown source {source!r}")
            records = ingest_source(
                self.cfg.sources[source], self.papers, self.gateway, self.web,
                self.clock, policy=ShortlistPolicy(), limit=limit,
            )
        stats = self.embed_corpus()
        return {"papers": len(records), "store_size": len(self.papers), **stats}

    def op_tree_build(self, topics: int | None = None) -> TopicTree:
        n = topics or self.cfg.topic_count
        collection = self.main_collection()
        tree = topictree.build_tree(collection, n, self.gateway)
        tree.save(self.tree_path())
        return tree

    def op_tree_show(self) -> str:
        tree = self.load_tree()

        def link_for(paper_id: str) -> str:
            record = self.papers.get(paper_id)
            return record.pdf_url if record else paper_id

        return topictree.render_tree(tree, link_for=link_for)

    def op_ideate(self, mode: str, topics: tuple[int, int] | None = None,
                  seed: int | None = None) -> list[IdeaRecord]:
        tree = self.load_tree()
        collection = self.main_collection()
        if mode == "distant":
            pairs = [ideation.find_distant_pair(tree, collection)]
        elif mode == "random":
            pairs = [ideation.random_pair(tree, self.cfg.seed if seed is None else seed)]
        elif mode == "manual":
            if topics is None:
                raise UsageError("manual mode needs --topics i,j")
            pairs = [ideation.manual_pair(tree, topics[0], topics[1])]
        elif mode == "all":
            pairs = ideation.all_pairs(tree)
        else:
            raise UsageError(f"unknown ideation mode {mode!r}")
        records = []
        for pair in pairs:
            record = ideation.generate_abstract(
                pair, tree, collection, self.gateway, self.clock,
                ablation_no_topics=self.cfg.ablation_no_topics,
            )
            self.ideas.add(record)
            records.append(record)
        return records

    def _require_idea(self, idea_id_: str) -> IdeaRecord:
        record = self.ideas.get(idea_id_)
        if record is None:
            raise NotFound(f"no idea {idea_id_!r}")
        return record

    def op_refine(self, idea_id_: str, rounds: int = 1) -> dict:
        idea = self._require_idea(idea_id_)
        tree = self.load_tree()
        collection = self.main_collection()
        refs = refine.build_reference_collection(
            idea, tree, collection, self.papers, self.gateway, self.scholar)
        self.vectors.persist(refs)
        empty_harvest = len(refs) == 0
        if not empty_harvest:
            validity = refine.evaluate_validity(idea, refs, self.gateway)
            self.reports.add(validity)
        current = idea
        for _round in range(max(rounds, 1)):
            current = refine.polish(current, refs, self.gateway, self.clock)
            self.ideas.add(current)
        return {
            "idea": current,
            "empty_harvest": empty_harvest,
            "references": len(refs),
        }

    def op_review(self, idea_id_: str) -> refine.ReviewReport:
        idea = self._require_idea(idea_id_)
        report = refine.peer_review(idea, self.reviews_collection(), self.gateway)
        self.reports.add(report)
        return report

    def op_procedure(self, idea_id_: str) -> refine.ProcedurePlan:
        idea = self._require_idea(idea_id_)
        collection = self.main_collection()
        plan = refine.generate_procedure(idea, collection, self.gateway)
        self.reports.add(plan)
        return plan

    def _merged_references(self) -> Collection:
        names = [n for n in self.vectors.list_collections()
                 if n.startswith("references-")]
        merged = Collection("references", self._embed_dimension())
        seen: set[str] = set()
        for name in names:
            collection = self.vectors.load(name)
            for i, entry_id in enumerate(collection.ids):
                if entry_id in seen:
                    continue
                seen.add(entry_id)
                merged.add([(entry_id, collection.get_vector(entry_id),
                             collection.metadatas[i], collection.texts[i])])
        return merged

    def op_combine(self, top_k: int = 10) -> list[IdeaRecord]:
        ideas = self.ideas.records()
        refs = self._merged_references()
        top = refine.select_unique(ideas, refs, self.gateway, top_k)
        combined = refine.combine_pairs(top, self.gateway, self.clock)
        for record in combined:
            self.ideas.add(record)
        return combined

    def op_qa(self, question: str) -> assistant.Answer:
        return assistant.answer_question(question, self.main_collection(),
                                         self.gateway)

    def op_summarize(self, paper_id: str) -> str:
        record = self.papers.get(paper_id)
        if record is None:
            raise NotFound(f"no paper {paper_id!r}")
        return assistant.summarize(record, self.gateway)

    def op_eval(self, idea_ids: list[str], exemplars_path: str,
                corpus: str | None = None) -> dict:
        exemplars_raw = json.loads(Path(exemplars_path).read_text(encoding="utf-8"))
        exemplars = [(row["abstract"], tuple(row["scores"]))
                     for row in exemplars_raw]
        ideas = [self._require_idea(i) for i in idea_ids]
        scores = [evaluator.judge_idea(idea, exemplars, self.gateway)
                  for idea in ideas]
        sims = []
        if corpus:
            held_out = self.vectors.load(corpus)
            sims = [evaluator.similarity_probability(idea, held_out, self.gateway)
                    for idea in ideas]
        text = evaluator.report(scores, sims)
        (self.cfg.store_dir / "eval_report.txt").write_text(text, encoding="utf-8")
        return {"report": text, "scores": scores, "similarities": sims}
