from __future__ import annotations

import pytest

from xacmet.constraints import path_constraints
from xacmet.errors import PathLimitExceeded
from xacmet.generator import generate_corpus
from xacmet.model import CombiningAlgorithm, Decision, Effect
from xacmet.oracle import observe
from xacmet.paths import RuleOutcome, build_paths, is_legal_walk
from xacmet.reference import evaluate_direct

from conftest import uniform_policy

S, U, N = RuleOutcome.SATISFIED, RuleOutcome.UNSATISFIED, RuleOutcome.NOT_EVALUATED
CORPUS = generate_corpus(count=30)


def summary(paths):
    return [(p.profile.policy_target, p.profile.rules, p.verdict) for p in paths]


def test_library_paths(library):
    paths = build_paths(library)
    assert summary(paths) == [
        (S, (S, N), Decision.DENY),
        (S, (U, S), Decision.PERMIT),
        (U, (N, N), Decision.NOT_APPLICABLE),
        (S, (U, U), Decision.NOT_APPLICABLE),
    ]
    assert [p.rank for p in paths] == [1, 2, 3, 4]
    assert paths[2].unfeasible and not any(p.unfeasible for i, p in enumerate(paths) if i != 2)
    assert paths[0].walk[-1] == "ReturnDeny" and paths[1].walk[-1] == "ReturnPermit"


def test_library_first_applicable(library):
    from dataclasses import replace
    paths = build_paths(replace(library, rule_combining=CombiningAlgorithm.FIRST_APPLICABLE))
    rule_paths = [(p.profile.rules, p.verdict) for p in paths if p.profile.policy_target is S]
    assert rule_paths == [((S, N), Decision.DENY), ((U, S), Decision.PERMIT),
                          ((U, U), Decision.NOT_APPLICABLE)]


def test_two_permit_rules_deny_overrides():
    paths = build_paths(uniform_policy(CombiningAlgorithm.DENY_OVERRIDES, Effect.PERMIT, 2))
    rule_paths = {(p.profile.rules, p.verdict) for p in paths if p.profile.policy_target is S}
    assert rule_paths == {((S, S), Decision.PERMIT), ((S, U), Decision.PERMIT),
                          ((U, S), Decision.PERMIT), ((U, U), Decision.NOT_APPLICABLE)}


def test_single_rule_order():
    paths = build_paths(uniform_policy(CombiningAlgorithm.FIRST_APPLICABLE, Effect.DENY, 1))
    assert paths[0].verdict is Decision.DENY
    assert all(p.verdict is Decision.NOT_APPLICABLE for p in paths[1:])


def test_shorter_first_among_equal_verdicts():
    paths = build_paths(uniform_policy(CombiningAlgorithm.PERMIT_OVERRIDES, Effect.PERMIT, 3))
    permits = [p for p in paths if p.verdict is Decision.PERMIT]
    lengths = [p.length for p in permits]
    assert lengths == sorted(lengths) and len(set(lengths)) > 1


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_first_applicable_count(n):
    paths = build_paths(uniform_policy(CombiningAlgorithm.FIRST_APPLICABLE, Effect.DENY, n))
    assert len(paths) == n + 2
    assert sum(p.unfeasible for p in paths) == 1


def test_path_cap():
    policy = uniform_policy(CombiningAlgorithm.DENY_OVERRIDES, Effect.PERMIT, 6)
    with pytest.raises(PathLimitExceeded):
        build_paths(policy, max_paths=32)
    assert len(build_paths(policy, max_paths=65)) == 65


def test_constraints_deny_path(library):
    lines = path_constraints(build_paths(library)[0]).lines()
    text = "\n".join(lines)
    assert "action:action-id = write" in text
    assert "resource:resource-id in {book, document, documententry}" in text
    assert "string-is-in(string-one-and-only(resource:simple-file-name), subject:subject-id)" in text
    assert all(line.startswith("ruleA:") for line in lines)


def test_constraints_unfeasible(library):
    c = path_constraints(build_paths(library)[2])
    assert c.unfeasible and c.lines()[-1].startswith("unsatisfiable")


def test_constraints_permit_path(library):
    c = path_constraints(build_paths(library)[1])
    negated = [x for x in c.constraints if not x.holds]
    assert [x.scope for x in negated] == ["ruleA"]
    assert {x.text for x in c.constraints if x.scope == "ruleB"} == {
        "subject:subject-id = Julius", "resource:resource-id = journals", "action:action-id = read"}


@pytest.mark.parametrize("granularity", ["rule", "element"])
@pytest.mark.parametrize("policy", CORPUS, ids=lambda p: p.id)
def test_path_invariants(policy, granularity):
    paths = build_paths(policy, granularity)
    ends = {Decision.PERMIT: "ReturnPermit", Decision.DENY: "ReturnDeny",
            Decision.NOT_APPLICABLE: "ReturnNotApplicable"}
    assert [p.rank for p in paths] == list(range(1, len(paths) + 1))
    assert len({p.walk for p in paths}) == len(paths)
    for p in paths:
        assert is_legal_walk(paths.graph, p.walk)
        assert p.walk[0] == paths.graph.entry.label
        assert p.walk[-1] == ends[p.verdict]
        if p.profile.policy_target is U:
            assert all(r is N for r in p.profile.rules)
        if policy.rule_combining is CombiningAlgorithm.FIRST_APPLICABLE:
            sat = [i for i, r in enumerate(p.profile.rules) if r is S]
            assert len(sat) <= 1
            if sat:
                assert all(r is N for r in p.profile.rules[sat[0] + 1:])


def test_satisfied_rule_walk_reaches_effect(library):
    deny = build_paths(library)[0]
    assert "Effect_3" in deny.walk and "NotApplicable_3" not in deny.walk
    permit = build_paths(library)[1]
    assert "NotApplicable_3" in permit.walk and "Effect_12" in permit.walk


def test_verdict_soundness_library(library, canonical):
    paths = build_paths(library)
    for request in canonical:
        observed = observe(paths, request)
        matches = [p for p in paths if p.profile.admits(observed)]
        assert len(matches) == 1
        assert matches[0].verdict is evaluate_direct(library, request)
