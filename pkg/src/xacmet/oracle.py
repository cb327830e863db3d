"""The path-based test oracle: request -> covered path -> verdict."""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field
from typing import Any

from .model import CATEGORIES, Decision, Request
from .paths import OutcomeProfile, PathSet, RuleOutcome
from .semantics import eval_condition, match_category
from .tree import T


@dataclass(frozen=True)
class OracleResult:
    verdict: Decision
    covered_path_rank: int
    rule_outcomes: OutcomeProfile


class _Plan:
    """Per-policy lookup of the tree labels each check reports as a failure point."""

    def __init__(self, paths: PathSet):
        tree = paths.graph.tree
        policy = paths.policy
        root_target = tree.children(tree.root.label)[0]
        self.policy_target = policy.target
        self.policy_sections = self._sections(tree, root_target, policy.target)
        self.rules = []
        for rule, node in zip(policy.rules, tree.rules()):
            kids = tree.children(node.label)
            condition = next((k.label for k in kids if k.node_type is T.CONDITION), None)
            self.rules.append((rule, self._sections(tree, kids[0], rule.target),
                               kids[0].label, condition))

    @staticmethod
    def _sections(tree, target_node, target):
        labels = iter(s.label for s in tree.children(target_node.label))
        return [(next(labels), cat) for cat in CATEGORIES if target.alternatives(cat)]


def _plan(paths: PathSet) -> _Plan:
    plan = getattr(paths, "_oracle_plan", None)
    if plan is None:
        plan = _Plan(paths)
        paths._oracle_plan = plan
    return plan


def _first_failure(target, sections, request) -> str | None:
    for label, cat in sections:
        if not match_category(target, cat, request):
            return label
    return None


def observe(paths: PathSet, request: Request) -> OutcomeProfile:
    """Evaluate the policy target and every rule, recording first failure points."""
    plan = _plan(paths)
    n = len(plan.rules)
    policy_fp = _first_failure(plan.policy_target, plan.policy_sections, request)
    if policy_fp is not None:
        return OutcomeProfile(RuleOutcome.UNSATISFIED, (RuleOutcome.NOT_EVALUATED,) * n,
                              (None,) * n, policy_fp)
    outcomes, points = [], []
    for rule, sections, _, condition_label in plan.rules:
        fp = _first_failure(rule.target, sections, request)
        if fp is None and not eval_condition(rule.condition, request):
            fp = condition_label
        outcomes.append(RuleOutcome.SATISFIED if fp is None else RuleOutcome.UNSATISFIED)
        points.append(fp)
    return OutcomeProfile(RuleOutcome.SATISFIED, tuple(outcomes), tuple(points))


def evaluate(paths: PathSet, request: Request) -> OracleResult:
    observed = observe(paths, request)
    for path in paths:
        if path.profile.admits(observed):
            return OracleResult(path.verdict, path.rank, observed)
    # unreachable while the profiles partition the outcome space
    raise AssertionError(f"no evaluation path admits {observed}")


def batch_evaluate(paths: PathSet, requests: Iterable[Request]) -> list[OracleResult]:
    return [evaluate(paths, r) for r in requests]


@dataclass(frozen=True)
class CoverageReport:
    total_paths: int
    covered_paths: int
    hits: dict[int, int]
    uncovered: tuple[int, ...]
    unfeasible: tuple[int, ...]
    requests: int = 0
    verdicts: dict[int, str] = field(default_factory=dict)

    @property
    def feasible_uncovered(self) -> tuple[int, ...]:
        return tuple(r for r in self.uncovered if r not in self.unfeasible)

    def as_dict(self) -> dict[str, Any]:
        return {
            "total_paths": self.total_paths,
            "covered_paths": self.covered_paths,
            "requests": self.requests,
            "hits": {str(k): v for k, v in self.hits.items()},
            "uncovered": list(self.uncovered),
            "unfeasible": list(self.unfeasible),
        }

    def to_text(self) -> str:
        lines = [f"covered {self.covered_paths}/{self.total_paths} paths "
                 f"with {self.requests} request(s)"]
        for rank, count in self.hits.items():
            flag = " (unfeasible)" if rank in self.unfeasible else ""
            verdict = self.verdicts.get(rank, "")
            lines.append(f"  path {rank:>3} {verdict:<13} hits={count}{flag}")
        return "\n".join(lines) + "\n"


def coverage(paths: PathSet, requests: Iterable[Request]) -> CoverageReport:
    hits = {p.rank: 0 for p in paths}
    count = 0
    for result in batch_evaluate(paths, requests):
        hits[result.covered_path_rank] += 1
        count += 1
    return CoverageReport(
        total_paths=len(paths),
        covered_paths=sum(1 for v in hits.values() if v),
        hits=hits,
        uncovered=tuple(r for r, v in hits.items() if not v),
        unfeasible=tuple(p.rank for p in paths if p.unfeasible),
        requests=count,
        verdicts={p.rank: p.verdict.value for p in paths},
    )
