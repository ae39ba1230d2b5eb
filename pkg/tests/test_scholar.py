import pytest

from ideaforge.errors import ApiError, NotFound
from ideaforge.providers import RetryPolicy
from ideaforge.scholar import ScholarClient, ScholarPaper

from fixture_servers import FixtureScholarApi

FIXTURE_DATA = {
    "papers": [
        {"paperId": "p-exact", "title": "Adaptive Gradient Methods",
         "abstract": "About adaptive gradients."},
        {"paperId": "p-fuzzy", "title": "Adaptive Gradient Methods Revisited",
         "abstract": "A fuzzier match."},
        {"paperId": "p-noabs", "title": "Silent Paper", "abstract": None},
    ],
    "details": {
        "late-abs": {"paperId": "late-abs", "title": "Late",
                     "abstract": "Fetched on demand."},
        "still-null": {"paperId": "still-null", "title": "Null", "abstract": None},
    },
    "references": {
        "p-exact": [
            {"paperId": "r1", "title": "Ref One", "abstract": "a1"},
            {"paperId": "r2", "title": "Ref Two", "abstract": "a2"},
            {"paperId": "r3", "title": "Ref Three", "abstract": None},
        ],
        "p-paged": [
            {"paperId": f"pr{i}", "title": f"Paged {i}", "abstract": f"pa{i}"}
            for i in range(4)
        ],
    },
    "citations": {
        "p-exact": [],
        "p-paged": [],
    },
}


def client_for(api: FixtureScholarApi, interval: float = 0.0) -> ScholarClient:
    return ScholarClient(base_url=api.base_url, min_interval_s=interval,
                         retry=RetryPolicy(max_retries=2, backoff_base_ms=1),
                         sleep=lambda _s: None if interval == 0 else None)


@pytest.fixture()
def api():
    with FixtureScholarApi(FIXTURE_DATA) as server:
        yield server


class TestFindPaperId:
    def test_exact_title(self, api):
        paper = client_for(api).find_paper_id("Adaptive Gradient Methods")
        assert paper.paper_id == "p-exact"

    def test_exact_match_beats_rank(self, api):
        # search is substring-based, so both papers match; the
        # case-insensitive exact title must win even if listed second
        paper = client_for(api).find_paper_id("adaptive gradient methods revisited")
        assert paper.paper_id == "p-fuzzy"

    def test_no_results_is_not_found(self, api):
        with pytest.raises(NotFound):
            client_for(api).find_paper_id("No Such Paper Anywhere")

    def test_empty_title_rejected(self, api):
        with pytest.raises(ValueError):
            client_for(api).find_paper_id("")


class TestFetchLinks:
    def test_reference_count(self, api):
        refs = client_for(api).fetch_links("p-exact", "references")
        assert [r.paper_id for r in refs] == ["r1", "r2", "r3"]

    def test_citations_empty(self, api):
        assert client_for(api).fetch_links("p-exact", "citations") == []

    def test_unknown_paper_not_found(self, api):
        with pytest.raises(NotFound):
            client_for(api).fetch_links("ghost", "references")

    def test_bad_direction_rejected(self, api):
        with pytest.raises(ValueError):
            client_for(api).fetch_links("p-exact", "sideways")

    def test_pagination_preserves_order(self):
        with FixtureScholarApi(FIXTURE_DATA, page_limit=2) as api:
            refs = client_for(api).fetch_links("p-paged", "references")
            assert [r.paper_id for r in refs] == ["pr0", "pr1", "pr2", "pr3"]
            # 2 pages of 2: at least 2 requests hit the server
            assert len(api.timestamps) >= 2


class TestFetchAbstracts:
    def test_null_abstracts_dropped(self, api):
        papers = [
            ScholarPaper("a", "A", "has one"),
            ScholarPaper("still-null", "N", None),
            ScholarPaper("b", "B", "another"),
        ]
        out = client_for(api).fetch_abstracts(papers)
        assert [p.paper_id for p in out] == ["a", "b"]
        assert all(p.abstract for p in out)

    def test_missing_abstract_fetched_on_demand(self, api):
        out = client_for(api).fetch_abstracts([ScholarPaper("late-abs", "L", None)])
        assert out == [ScholarPaper("late-abs", "L", "Fetched on demand.")]

    def test_duplicates_collapse(self, api):
        papers = [ScholarPaper("a", "A", "x"), ScholarPaper("a", "A", "x")]
        assert len(client_for(api).fetch_abstracts(papers)) == 1

    def test_empty_input_rejected(self, api):
        with pytest.raises(ValueError):
            client_for(api).fetch_abstracts([])


class TestRateLimitAndRetry:
    def test_dispatch_interval_enforced(self):
        interval = 0.05
        with FixtureScholarApi(FIXTURE_DATA) as api:
            client = ScholarClient(base_url=api.base_url,
                                   min_interval_s=interval,
                                   retry=RetryPolicy(max_retries=1, backoff_base_ms=1))
            for _ in range(4):
                client.find_paper_id("Adaptive Gradient Methods")
            stamps = api.timestamps
            assert len(stamps) == 4
            gaps = [b - a for a, b in zip(stamps, stamps[1:])]
            assert all(gap >= interval - 0.01 for gap in gaps)

    def test_api_error_after_retries(self):
        # point the client at a closed port: connection errors, then ApiError
        client = ScholarClient(base_url="http://127.0.0.1:9",
                               min_interval_s=0.0,
                               retry=RetryPolicy(max_retries=1, backoff_base_ms=1),
                               sleep=lambda _s: None)
        with pytest.raises(ApiError):
            client.find_paper_id("anything")
