import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # fixture_servers

TOPIC_LABELS = [
    "Optimization",
    "Language models",
    "Prompt engineering",
    "Adversarial attacks",
    "Benchmarking",
]

_TOPIC_SENTENCES = {
    "Optimization": (
        "Optimization of deep networks with adaptive gradient descent. "
        "We tune the optimization schedule, momentum, and learning rate decay. "
        "Convergence of the optimization loop is measured across epochs. "
        "Optimization stability improves with warm restarts."
    ),
    "Language models": (
        "Language models trained on web corpora learn transferable skills. "
        "Scaling language models improves perplexity and reasoning. "
        "We probe language models for factual recall and calibration. "
        "Instruction tuning aligns language models with user intent."
    ),
    "Prompt engineering": (
        "Prompt engineering shapes model behavior without retraining. "
        "We compare prompt templates, demonstrations, and chain styles. "
        "Careful prompt engineering reduces variance across seeds. "
        "Prompt libraries make prompt engineering reproducible."
    ),
    "Adversarial attacks": (
        "Adversarial attacks perturb inputs to flip classifier decisions. "
        "We craft adversarial attacks under norm-bounded threat models. "
        "Defenses against adversarial attacks trade accuracy for robustness. "
        "Certified bounds limit the reach of adversarial attacks."
    ),
    "Benchmarking": (
        "Benchmarking suites compare systems under a shared protocol. "
        "We extend the benchmarking harness with contamination checks. "
        "Benchmarking results are reported with confidence intervals. "
        "Leaderboard benchmarking rewards reproducible submissions."
    ),
}

_REVIEW_TEXT = (
    "**Summary:** The submission tackles a well-scoped problem with a clean "
    "method.\n**Strengths:** Clear writing and a careful evaluation protocol."
    "\n**Weaknesses:** The ablations are thin and the datasets are small."
    "\n**Conclusion:** Lean accept."
)

E2E_SCRIPT = [
    {"pattern": "most frequent topics",
     "response": "1. Optimization\n2. Language models\n3. Prompt engineering\n"
                 "4. Adversarial attacks\n5. Benchmarking"},
    {"pattern": r"Describe .+ in a roughly 5-sentence paragraph",
     "response": "This topic groups papers that share methods, benchmarks, and "
                 "open problems. It recurs across the corpus with several "
                 "distinct framings. Recent work refines both theory and "
                 "tooling. Evaluation practice is converging. Open questions "
                 "remain about robustness."},
    {"pattern": "Write a detailed research paper abstract",
     "response": "We propose a framework that recombines two research threads "
                 "into one testable system, pairing shared benchmarks with a "
                 "transfer protocol that neither thread uses alone. The "
                 "design yields new measurable predictions."},
    {"pattern": "Polish the abstract",
     "response": "Title: A Grounded Recombination Framework\n\nWe sharpen the "
                 "proposed framework against the cited prior work, emphasize "
                 "what the combination adds over each thread alone, and state "
                 "the evaluation plan explicitly."},
    {"pattern": "Evaluate the validity",
     "response": "The provided abstract is valid based on the given papers."},
    {"pattern": "Write a peer review",
     "response": "**Summary:** A plausible recombination with a concrete plan."
                 "\n**Strengths:** Grounded in retrieved sources."
                 "\n**Weaknesses:** Feasibility depends on dataset access."
                 "\n**Conclusion:** Worth prototyping."},
    {"pattern": "experimental procedure",
     "response": "1. Gather background context from the cited corpora.\n"
                 "2. Retrieve related methods and baselines.\n"
                 "3. Implement the combined system end to end.\n"
                 "4. Run ablations isolating each thread's contribution.\n"
                 "5. Evaluate with held-out benchmarks and expert review."},
    {"pattern": "most unique", "response": "1, 2"},
    {"pattern": "Rate the similarity", "response": "0.60"},
    {"pattern": "Rate the following abstract", "response": "8.4 / 8.1 / 7.9"},
]

SCHOLAR_E2E_DATA = {
    "papers": [],
    "references": {"*": [
        {"paperId": "ref-a", "title": "Shared Reference A",
         "abstract": "A reference abstract about transfer protocols and "
                     "benchmark design used across many papers."},
        {"paperId": "ref-b", "title": "Shared Reference B",
         "abstract": "A reference abstract about evaluation methodology and "
                     "robustness measurement."},
    ]},
    "citations": {"*": [
        {"paperId": "cit-a", "title": "Shared Citation A",
         "abstract": "A follow-up abstract exploring applications of the "
                     "combined approach in new domains."},
    ]},
}


def write_corpus(directory: Path, docs_per_topic: int = 6,
                 reviews_for_first: int = 2) -> list[str]:
    """Writes docs_per_topic small .txt papers per topic with metadata
    sidecars; the first ``reviews_for_first`` docs of each topic carry
    review texts. Returns the file stems in order."""
    directory.mkdir(parents=True, exist_ok=True)
    stems = []
    for t_index, label in enumerate(TOPIC_LABELS):
        base = _TOPIC_SENTENCES[label]
        for d_index in range(docs_per_topic):
            stem = f"paper{t_index}{d_index}"
            text = (f"{label} study number {d_index}.\n\n{base}\n\n"
                    f"Case {d_index} extends this line of work with new "
                    f"experiments and a replication appendix.")
            (directory / f"{stem}.txt").write_text(text, encoding="utf-8")
            meta = {
                "title": f"{label} Study {d_index}",
                "conference": "FIXCONF",
            }
            if d_index < reviews_for_first:
                meta["reviews"] = [_REVIEW_TEXT]
            (directory / f"{stem}.meta.json").write_text(
                json.dumps(meta), encoding="utf-8")
            stems.append(stem)
    return stems


def write_mock_script(path: Path, extra: list[dict] | None = None) -> Path:
    script = list(extra or []) + E2E_SCRIPT
    path.write_text(json.dumps(script, indent=1), encoding="utf-8")
    return path


def write_config(path: Path, store_dir: Path, script_path: Path,
                 scholar_url: str | None = None,
                 ablation: bool = False, **overrides) -> Path:
    lines = [
        f'store_dir = "{store_dir}"',
        "topic_count = 5",
        "deterministic = true",
        "seed = 13",
        f"ablation_no_topics = {'true' if ablation else 'false'}",
        "",
        "[provider]",
        'kind = "mock"',
        f'script = "{script_path}"',
        "embed_dimension = 256",
        "",
        "[retry]",
        "max_retries = 5",
        "backoff_base_ms = 1",
    ]
    if scholar_url:
        lines += ["", "[scholar]", f'base_url = "{scholar_url}"',
                  "min_interval_s = 0.0"]
    for key, value in overrides.items():
        lines.append(f"{key} = {value}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def embed_records(records, gateway, chunk_size: int = 3000):
    """Split and embed paper records into an in-memory main collection."""
    from ideaforge.vectorstore import ChunkingPolicy, Collection, split_text

    dimension = gateway.embed(["probe"])[0].dimension
    main = Collection("main", dimension)
    for record in records:
        chunks = split_text(record.full_text,
                            ChunkingPolicy(chunk_size=chunk_size),
                            paper_id=record.id)
        vectors = gateway.embed([c.text for c in chunks])
        main.add_chunks(chunks, vectors, conference=record.conference)
    return main


@pytest.fixture()
def corpus_dir(tmp_path):
    directory = tmp_path / "corpus"
    write_corpus(directory)
    return directory


@pytest.fixture()
def mock_script_path(tmp_path):
    return write_mock_script(tmp_path / "mock_script.json")
