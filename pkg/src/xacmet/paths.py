"""Unfolding the colored graph into ranked evaluation paths.

A path is the concatenation of one *segment* per visited rule, glued
together at the RuleAlgorithm node. Inside a rule, a segment walks the
colored edges: a blue edge means the match node was satisfied, a red one
that the next alternative (or the rule's NotApplicable node) is tried.
Segments only ever succeed at the first alternative of a section, which
keeps the walk canonical; what matters for verdicts is the outcome
profile, not which alternative matched.

With ``granularity="rule"`` a rule contributes one satisfied and one
unsatisfied segment. ``"element"`` keeps one unsatisfied segment per
failure point (each section and the condition), so it reports finer
coverage at the cost of more paths.
"""

from __future__ import annotations

import enum
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field, replace
from typing import Any

from .errors import PathLimitExceeded
from .graph import EdgeColor, XacGraph, build_graph, color_edges
from .model import CombiningAlgorithm, Decision, Effect, Policy
from .tree import MATCH_TYPES, T, XacNode, build_tree, effect_of

DEFAULT_MAX_PATHS = 4096
GRANULARITIES = ("rule", "element")


class RuleOutcome(str, enum.Enum):
    SATISFIED = "Satisfied"
    UNSATISFIED = "Unsatisfied"
    NOT_EVALUATED = "NotEvaluated"


_OUTCOME_ORDER = {RuleOutcome.SATISFIED: 0, RuleOutcome.UNSATISFIED: 1,
                  RuleOutcome.NOT_EVALUATED: 2}


@dataclass(frozen=True)
class OutcomeProfile:
    """Outcome of the policy target and of each rule, in document order.

    ``failure_points`` (element granularity only) names, for each
    unsatisfied entry, the section or condition node that failed first;
    ``policy_failure`` does the same for the policy target.
    """

    policy_target: RuleOutcome
    rules: tuple[RuleOutcome, ...]
    failure_points: tuple[str | None, ...] = ()
    policy_failure: str | None = None

    def __post_init__(self):
        if self.policy_target is RuleOutcome.NOT_EVALUATED:
            raise ValueError("the policy target is always evaluated")
        if (self.policy_target is RuleOutcome.UNSATISFIED
                and any(r is not RuleOutcome.NOT_EVALUATED for r in self.rules)):
            raise ValueError("rules cannot be evaluated under an unsatisfied policy target")
        if not self.failure_points:
            object.__setattr__(self, "failure_points", (None,) * len(self.rules))

    def admits(self, observed: "OutcomeProfile") -> bool:
        """Is a fully evaluated ``observed`` profile consistent with this one?"""
        if observed.policy_target is not self.policy_target:
            return False
        if self.policy_failure is not None and observed.policy_failure != self.policy_failure:
            return False
        if self.policy_target is RuleOutcome.UNSATISFIED:
            return True
        for want, got, fp, got_fp in zip(self.rules, observed.rules,
                                         self.failure_points, observed.failure_points):
            if want is RuleOutcome.NOT_EVALUATED:
                continue
            if want is not got:
                return False
            if fp is not None and fp != got_fp:
                return False
        return True

    def sort_key(self) -> tuple:
        return (_OUTCOME_ORDER[self.policy_target],
                tuple(_OUTCOME_ORDER[r] for r in self.rules),
                tuple(fp or "" for fp in self.failure_points),
                self.policy_failure or "")

    def as_dict(self, rule_ids: Sequence[str]) -> dict[str, Any]:
        out: dict[str, Any] = {"policy_target": self.policy_target.value}
        if self.policy_failure:
            out["policy_failure"] = self.policy_failure
        rules = {}
        for rid, outcome, fp in zip(rule_ids, self.rules, self.failure_points):
            rules[rid] = outcome.value if fp is None else f"{outcome.value}@{fp}"
        out["rules"] = rules
        return out


@dataclass(frozen=True)
class EvaluationPath:
    walk: tuple[str, ...]
    profile: OutcomeProfile
    verdict: Decision
    algorithm: CombiningAlgorithm
    unfeasible: bool = False
    rank: int = 0
    policy: Policy | None = field(default=None, compare=False, repr=False)

    @property
    def length(self) -> int:
        return len(self.walk)

    @property
    def deciding_rule(self) -> int | None:
        """Index of the last satisfied rule, the one whose effect became the verdict."""
        if self.verdict is Decision.NOT_APPLICABLE:
            return None
        sat = [i for i, r in enumerate(self.profile.rules) if r is RuleOutcome.SATISFIED]
        return sat[-1] if sat else None


@dataclass(frozen=True)
class _Segment:
    walk: tuple[str, ...]
    satisfied: bool
    failure_point: str | None
    unfeasible: bool


def _needs_coloring(graph: XacGraph) -> bool:
    return any(graph.node(e.source).node_type in MATCH_TYPES and e.color is EdgeColor.PLAIN
               for e in graph.edges)


def _segments(graph: XacGraph, start: str, accept: XacNode, reject: XacNode) -> list[_Segment]:
    """All canonical walks from ``start`` to ``accept`` or ``reject``."""
    tree = graph.tree
    out: list[_Segment] = []

    def visit(label: str, walk: tuple[str, ...], unfeasible: bool, fp: str | None):
        walk = walk + (label,)
        if label == accept.label:
            out.append(_Segment(walk, True, None, unfeasible))
            return
        if label == reject.label:
            out.append(_Segment(walk, False, fp, unfeasible))
            return
        node = graph.node(label)
        edges = graph.out_edges(label)
        if node.node_type in MATCH_TYPES:
            first = tree.left_sibling(label) is None
            section = tree.parent(label).label
            for e in edges:
                if e.color is EdgeColor.BLUE and first:
                    visit(e.target, walk, unfeasible, fp)
                elif e.color is EdgeColor.RED:
                    visit(e.target, walk, unfeasible, section)
        elif len(edges) == 1:
            visit(edges[0].target, walk, unfeasible, fp)
        else:
            # Condition, or an empty Target that can only succeed
            can_fail = node.node_type is T.CONDITION
            for e in edges:
                if e.target == reject.label:
                    visit(e.target, walk, unfeasible or not can_fail, label)
                elif e.target == accept.label:
                    visit(e.target, walk, unfeasible, fp)

    visit(start, (), False, None)
    return out


def _select(segments: list[_Segment], granularity: str, graph: XacGraph) -> list[_Segment]:
    sat = [s for s in segments if s.satisfied]
    unsat = [s for s in segments if not s.satisfied]
    if granularity == "element":
        return sat + sorted(unsat, key=lambda s: graph.node(s.failure_point).parameter)
    first = min(unsat, key=lambda s: graph.node(s.failure_point).parameter)
    return sat + [first]


def next_step(algorithm: CombiningAlgorithm, last: XacNode, remaining: bool,
              has_effect: bool) -> Decision | None:
    """Successor of RuleAlgorithm given the node just before it.

    ``None`` means "go to the next unvisited rule".
    """
    if last.node_type is T.EFFECT:
        effect = effect_of(last)
        if algorithm is CombiningAlgorithm.FIRST_APPLICABLE:
            return Decision.from_effect(effect)
        overriding = (Effect.DENY if algorithm is CombiningAlgorithm.DENY_OVERRIDES
                      else Effect.PERMIT)
        if effect is overriding:
            return Decision.from_effect(effect)
        return None if remaining else Decision.from_effect(effect)
    if remaining:
        return None
    if has_effect and algorithm is not CombiningAlgorithm.FIRST_APPLICABLE:
        return (Decision.PERMIT if algorithm is CombiningAlgorithm.DENY_OVERRIDES
                else Decision.DENY)
    return Decision.NOT_APPLICABLE


_RETURN_LABEL = {
    Decision.PERMIT: "ReturnPermit",
    Decision.DENY: "ReturnDeny",
    Decision.NOT_APPLICABLE: "ReturnNotApplicable",
}


def unfold(graph: XacGraph, granularity: str = "rule",
           max_paths: int = DEFAULT_MAX_PATHS) -> list[EvaluationPath]:
    """Enumerate every evaluation path (unranked, in generation order)."""
    if granularity not in GRANULARITIES:
        raise ValueError(f"granularity must be one of {GRANULARITIES}")
    if _needs_coloring(graph):
        graph = color_edges(graph)
    tree = graph.tree
    policy = tree.root.payload if isinstance(tree.root.payload, Policy) else None
    algorithm = graph.algorithm
    rule_nodes = [graph.node(r) for r in graph.rule_labels]
    n = len(rule_nodes)
    return_na = graph.node("ReturnNotApplicable")

    rule_segments = []
    for rule in rule_nodes:
        segs = _segments(graph, rule.label, graph.effect_node(rule.label),
                         graph.not_applicable_node(rule.label))
        rule_segments.append(_select(segs, granularity, graph))
    policy_segments = _select(
        _segments(graph, graph.entry.label, rule_nodes[0], return_na), granularity, graph)

    paths: list[EvaluationPath] = []

    def emit(walk, outcomes, fps, verdict, unfeasible, policy_ok=True, policy_fp=None):
        if len(paths) >= max_paths:
            raise PathLimitExceeded(
                f"policy unfolds into more than {max_paths} paths; raise max_paths "
                "or use rule granularity")
        rules = tuple(outcomes) + (RuleOutcome.NOT_EVALUATED,) * (n - len(outcomes))
        points = tuple(fps) + (None,) * (n - len(fps))
        profile = OutcomeProfile(
            RuleOutcome.SATISFIED if policy_ok else RuleOutcome.UNSATISFIED,
            rules, points if granularity == "element" else (),
            policy_fp if granularity == "element" else None)
        paths.append(EvaluationPath(tuple(walk), profile, verdict, algorithm,
                                    unfeasible, 0, policy))

    def extend(i, walk, outcomes, fps, has_effect, unfeasible):
        for seg in rule_segments[i]:
            w = walk + seg.walk[1:] + ("RuleAlgorithm",)
            last = graph.node(seg.walk[-1])
            o = outcomes + [RuleOutcome.SATISFIED if seg.satisfied else RuleOutcome.UNSATISFIED]
            f = fps + [seg.failure_point if granularity == "element" else None]
            effect_seen = has_effect or seg.satisfied
            bad = unfeasible or seg.unfeasible
            decision = next_step(algorithm, last, i + 1 < n, effect_seen)
            if decision is None:
                extend(i + 1, w + (rule_nodes[i + 1].label,), o, f, effect_seen, bad)
            else:
                emit(w + (_RETURN_LABEL[decision],), o, f, decision, bad)

    for pseg in policy_segments:
        if pseg.satisfied:
            extend(0, pseg.walk, [], [], False, pseg.unfeasible)
        else:
            emit(pseg.walk, [], [], Decision.NOT_APPLICABLE, pseg.unfeasible,
                 policy_ok=False, policy_fp=pseg.failure_point)
    return paths


def _priority(path: EvaluationPath) -> int:
    if path.algorithm is CombiningAlgorithm.FIRST_APPLICABLE:
        rule = path.deciding_rule
        return len(path.profile.rules) if rule is None else rule
    order = ((Decision.DENY, Decision.PERMIT) if path.algorithm is CombiningAlgorithm.DENY_OVERRIDES
             else (Decision.PERMIT, Decision.DENY))
    return order.index(path.verdict) if path.verdict in order else 2


def path_sort_key(path: EvaluationPath) -> tuple:
    return (_priority(path), path.length, path.profile.sort_key(), path.walk)


def order_paths(paths) -> list[EvaluationPath]:
    """Rank paths: verdict priority, then walk length, then rule order."""
    ordered = sorted(paths, key=path_sort_key)
    return [replace(p, rank=i) for i, p in enumerate(ordered, start=1)]


class PathSet(Sequence):
    """Ranked evaluation paths of one policy, plus the graph they came from."""

    def __init__(self, graph: XacGraph, paths: Sequence[EvaluationPath], granularity: str = "rule"):
        self.graph = graph
        self.paths = tuple(paths)
        self.granularity = granularity

    @property
    def policy(self) -> Policy:
        return self.graph.tree.root.payload

    @property
    def algorithm(self) -> CombiningAlgorithm:
        return self.graph.algorithm

    def __getitem__(self, index):
        return self.paths[index]

    def __len__(self) -> int:
        return len(self.paths)

    def __iter__(self) -> Iterator[EvaluationPath]:
        return iter(self.paths)

    def by_rank(self, rank: int) -> EvaluationPath:
        return self.paths[rank - 1]


def build_paths(policy: Policy, granularity: str = "rule",
                max_paths: int = DEFAULT_MAX_PATHS) -> PathSet:
    """Policy -> tree -> colored graph -> ranked paths."""
    graph = color_edges(build_graph(build_tree(policy)))
    return PathSet(graph, order_paths(unfold(graph, granularity, max_paths)), granularity)


def is_legal_walk(graph: XacGraph, walk: Sequence[str]) -> bool:
    return all(graph.has_edge(a, b) for a, b in zip(walk, walk[1:]))

