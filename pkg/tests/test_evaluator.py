import math

import pytest

from ideaforge.errors import UnparsableScores
from ideaforge.evaluator import (
    EvalScore,
    SimilarityScore,
    judge_idea,
    mean_scores,
    report,
    similarity_probability,
)
from ideaforge.ideation import IdeaRecord, LineageEntry, TopicPair
from ideaforge.providers import mock_gateway
from ideaforge.vectorstore import Collection


def idea(abstract="an abstract") -> IdeaRecord:
    return IdeaRecord(
        id="idea-1",
        pair=TopicPair(first=0, second=1, selection_mode="manual"),
        abstract=abstract,
        lineage=[LineageEntry("generate", "0" * 64, 0.0)],
    )


EXEMPLARS = [("an exemplar abstract", (8.0, 7.5, 7.0))]


def held_out(gateway, name="corpus-2024") -> Collection:
    texts = ["paper one text about methods", "paper two text about results"]
    vectors = gateway.embed(texts)
    collection = Collection(name, vectors[0].dimension)
    collection.add((f"h{i}", v, {}, t)
                   for i, (t, v) in enumerate(zip(texts, vectors)))
    return collection


class TestJudgeIdea:
    def test_scripted_triple(self):
        gw = mock_gateway(script=[("Rate the following abstract", "8.4 / 8.1 / 7.9")])
        score = judge_idea(idea(), EXEMPLARS, gw)
        assert (score.interestingness, score.novelty, score.feasibility) == \
            (8.4, 8.1, 7.9)
        assert score.judge_fingerprint

    def test_out_of_range_rejected_after_retry(self):
        gw = mock_gateway(script=[("Rate the following abstract", "11/5/5")])
        with pytest.raises(UnparsableScores):
            judge_idea(idea(), EXEMPLARS, gw)
        assert len(gw.chat_provider.calls) == 2

    def test_wordy_reply_parses_first_three_numbers(self):
        gw = mock_gateway(script=[(
            "Rate the following abstract",
            "Interestingness: 8.4\nNovelty: 8.1\nFeasibility: 7.9\nNice idea.")])
        score = judge_idea(idea(), EXEMPLARS, gw)
        assert score.novelty == 8.1

    def test_too_few_numbers_retry_then_error(self):
        gw = mock_gateway(script=[("Rate the following abstract", "great!")])
        with pytest.raises(UnparsableScores):
            judge_idea(idea(), EXEMPLARS, gw)

    def test_requires_exemplars(self):
        with pytest.raises(ValueError):
            judge_idea(idea(), [], mock_gateway())

    def test_prompt_is_fingerprint_stable(self):
        gw1 = mock_gateway(script=[("Rate the following abstract", "8/8/8")])
        gw2 = mock_gateway(script=[("Rate the following abstract", "8/8/8")])
        a = judge_idea(idea(), EXEMPLARS, gw1)
        b = judge_idea(idea(), EXEMPLARS, gw2)
        assert a.judge_fingerprint == b.judge_fingerprint

    def test_exemplars_embedded_in_prompt(self):
        gw = mock_gateway(script=[("Rate the following abstract", "8/8/8")])
        judge_idea(idea(), EXEMPLARS, gw)
        prompt = gw.chat_provider.calls[-1].user_prompt
        assert "an exemplar abstract" in prompt
        assert "interestingness 8.0" in prompt


class TestSimilarityProbability:
    def test_scripted_point_six(self):
        gw = mock_gateway(script=[("Rate the similarity", "0.60")])
        score = similarity_probability(idea(), held_out(gw), gw)
        assert score.probability == 0.60
        assert score.corpus_name == "corpus-2024"

    def test_zero_boundary(self):
        gw = mock_gateway(script=[("Rate the similarity", "0")])
        assert similarity_probability(idea(), held_out(gw), gw).probability == 0.0

    def test_lenient_extraction(self):
        gw = mock_gateway(script=[("Rate the similarity", "similarity: 0.35.")])
        assert similarity_probability(idea(), held_out(gw), gw).probability == 0.35

    def test_out_of_range_clamps(self):
        gw = mock_gateway(script=[("Rate the similarity", "1.7")])
        assert similarity_probability(idea(), held_out(gw), gw).probability == 1.0

    def test_no_number_after_retry_raises(self):
        gw = mock_gateway(script=[("Rate the similarity", "none to give")])
        with pytest.raises(UnparsableScores):
            similarity_probability(idea(), held_out(gw), gw)
        assert len(gw.chat_provider.calls) == 2

    def test_empty_corpus_rejected(self):
        gw = mock_gateway()
        with pytest.raises(ValueError):
            similarity_probability(idea(), Collection("corpus-2024", 256), gw)


def score(i, n, f) -> EvalScore:
    return EvalScore(idea_id="x", interestingness=i, novelty=n, feasibility=f,
                     judge_fingerprint="0" * 64)


class TestReport:
    def test_means_match_hand_computation(self):
        scores = [score(8, 8, 8), score(9, 9, 9)]
        means = mean_scores(scores)
        assert all(math.isclose(m, 8.5, abs_tol=1e-9) for m in means)
        text = report(scores)
        assert "interestingness  8.50" in text
        assert "novelty          8.50" in text
        assert "feasibility      8.50" in text

    def test_single_score_is_its_own_mean(self):
        text = report([score(8.4, 8.1, 7.9)])
        assert "8.40" in text and "8.10" in text and "7.90" in text

    def test_empty_sims_gives_scores_only(self):
        text = report([score(8, 8, 8)], sims=[])
        assert "Similarity" not in text

    def test_sims_grouped_by_corpus(self):
        sims = [SimilarityScore("a", "corpus-2024", 0.5),
                SimilarityScore("b", "corpus-2024", 0.7)]
        text = report([score(8, 8, 8)], sims)
        assert "Similarity vs corpus-2024 (n=2)" in text
        assert "mean probability 0.60" in text

    def test_empty_scores_rejected(self):
        with pytest.raises(ValueError):
            report([])


class TestScoreTypes:
    def test_eval_score_range_enforced(self):
        with pytest.raises(ValueError):
            score(0.5, 5, 5)
        with pytest.raises(ValueError):
            score(5, 10.5, 5)

    def test_similarity_range_enforced(self):
        with pytest.raises(ValueError):
            SimilarityScore("x", "c", 1.2)
