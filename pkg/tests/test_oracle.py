from __future__ import annotations

from hypothesis import given, settings
from hypothesis import strategies as st

from xacmet.harness import enumerate_requests
from xacmet.model import Decision, Request
from xacmet.oracle import batch_evaluate, coverage, evaluate
from xacmet.paths import build_paths
from xacmet.reference import evaluate_direct

D, P, NA = Decision.DENY, Decision.PERMIT, Decision.NOT_APPLICABLE


def test_evaluate_examples(library, canonical):
    paths = build_paths(library)
    a_only, both, b_only, neither = canonical
    result = evaluate(paths, a_only)
    assert result.verdict is D and paths.by_rank(result.covered_path_rank).verdict is D
    assert evaluate(paths, b_only).verdict is P
    assert evaluate(paths, neither).verdict is NA
    # both satisfied: covered by the merged Deny path
    assert evaluate(paths, both).covered_path_rank == result.covered_path_rank


def test_result_profile_is_admitted(library, canonical):
    paths = build_paths(library)
    for request in canonical:
        result = evaluate(paths, request)
        assert paths.by_rank(result.covered_path_rank).profile.admits(result.rule_outcomes)


def test_batch_in_outcome_order(library, canonical):
    a_only, both, b_only, neither = canonical
    results = batch_evaluate(build_paths(library), [a_only, b_only, both, neither])
    assert [r.verdict for r in results] == [D, P, D, NA]
    assert batch_evaluate(build_paths(library), []) == []


def test_batch_matches_reference(library):
    requests = enumerate_requests(library, limit=100)
    assert len(requests) == 100
    verdicts = [r.verdict for r in batch_evaluate(build_paths(library), requests)]
    assert verdicts == [evaluate_direct(library, r) for r in requests]


def test_coverage_canonical(library, canonical):
    report = coverage(build_paths(library), canonical)
    assert report.feasible_uncovered == ()
    assert report.covered_paths == 3 and report.total_paths == 4
    assert sum(report.hits.values()) == report.requests == 4


def test_coverage_empty(library):
    report = coverage(build_paths(library), [])
    assert report.covered_paths == 0 and report.uncovered == (1, 2, 3, 4)


def test_coverage_exhaustive(library):
    report = coverage(build_paths(library), enumerate_requests(library))
    assert report.feasible_uncovered == ()
    assert report.as_dict()["unfeasible"] == [3]
    assert "covered 3/4 paths" in report.to_text()


def test_element_granularity_exhaustive(library):
    paths = build_paths(library, "element")
    requests = enumerate_requests(library)
    assert [r.verdict for r in batch_evaluate(paths, requests)] == [
        evaluate_direct(library, r) for r in requests]


def test_element_path_needs_multivalued_bag(library):
    # ruleA fails on its action while ruleB holds: only a two-resource bag gets here
    from xacmet.model import ACTION_ID, RESOURCE_ID, SUBJECT_ID
    paths = build_paths(library, "element")
    request = Request.of({SUBJECT_ID: "Julius"}, {RESOURCE_ID: ["documententry", "journals"]},
                         {ACTION_ID: "read"})
    result = evaluate(paths, request)
    assert result.verdict is P
    assert result.rule_outcomes.failure_points == ("Actions_9", None)


_POOL = None


def _pool(library):
    global _POOL
    if _POOL is None:
        _POOL = enumerate_requests(library)
    return _POOL


@settings(max_examples=50, deadline=None)
@given(st.data())
def test_coverage_monotone(library, data):
    pool = _pool(library)
    paths = build_paths(library)
    picks = data.draw(st.lists(st.integers(0, len(pool) - 1), max_size=20))
    extra = data.draw(st.lists(st.integers(0, len(pool) - 1), max_size=10))
    base = coverage(paths, [pool[i] for i in picks])
    more = coverage(paths, [pool[i] for i in picks + extra])
    assert more.covered_paths >= base.covered_paths
    assert more.covered_paths <= more.total_paths
