"""Readable constraint listings for evaluation paths."""

from __future__ import annotations

from dataclasses import dataclass

from .functions import lookup
from .model import (
    CATEGORIES,
    Apply,
    ConditionExpr,
    DesignatorBag,
    Literal,
    MatchPredicate,
    Policy,
    TargetSpec,
)
from .paths import EvaluationPath, RuleOutcome
from .tree import build_tree


@dataclass(frozen=True)
class Constraint:
    scope: str  # "policy" or a rule id
    element: str  # tree label of the constrained node
    holds: bool  # False: the request must violate ``text``
    text: str

    def __str__(self) -> str:
        return f"{self.scope}: {'' if self.holds else 'not '}({self.text})"


@dataclass(frozen=True)
class PathConstraints:
    constraints: tuple[Constraint, ...]
    unfeasible: bool
    reason: str | None = None

    def lines(self) -> list[str]:
        out = [str(c) for c in self.constraints]
        if self.unfeasible:
            out.append(f"unsatisfiable: {self.reason}")
        return out


def _attr(designator) -> str:
    return f"{designator.category.value.lower()}:{designator.attribute_id.rsplit(':', 1)[-1]}"


def describe_predicate(pred: MatchPredicate) -> str:
    name = lookup(pred.function_id).name
    attr = _attr(pred.designator)
    lit = pred.literal.literal
    if name.endswith("-equal"):
        return f"{attr} = {lit}"
    if name == "integer-greater-than":
        return f"{attr} < {lit}"
    if name == "integer-less-than":
        return f"{attr} > {lit}"
    return f"{name}({lit}, {attr})"


def describe_section(alternatives) -> str:
    singles = [conj[0] for conj in alternatives if len(conj) == 1]
    if (len(singles) == len(alternatives) > 1
            and len({(p.designator, p.function_id) for p in singles}) == 1
            and lookup(singles[0].function_id).name.endswith("-equal")):
        values = ", ".join(p.literal.literal for p in singles)
        return f"{_attr(singles[0].designator)} in {{{values}}}"
    parts = [" and ".join(describe_predicate(p) for p in conj) for conj in alternatives]
    if len(parts) == 1:
        return parts[0]
    return " or ".join(f"({p})" for p in parts)


def describe_expr(expr: ConditionExpr) -> str:
    if isinstance(expr, Literal):
        return expr.value.literal
    if isinstance(expr, DesignatorBag):
        return _attr(expr.designator)
    assert isinstance(expr, Apply)
    return f"{lookup(expr.function_id).name}({', '.join(describe_expr(a) for a in expr.args)})"


def _parts(target: TargetSpec, condition, labels) -> list[tuple[str, str]]:
    """(element label, description) for each section and the condition."""
    parts = []
    sections = iter(labels["sections"])
    for cat in CATEGORIES:
        alternatives = target.alternatives(cat)
        if alternatives:
            parts.append((next(sections), describe_section(alternatives)))
    if condition is not None:
        parts.append((labels["condition"], describe_expr(condition)))
    return parts


def _labels(tree, node) -> dict:
    kids = tree.children(node.label)
    target = kids[0]
    return {
        "target": target.label,
        "sections": [s.label for s in tree.children(target.label)],
        "condition": next((k.label for k in kids if k.node_type.value == "Condition"), None),
    }


def path_constraints(path: EvaluationPath, policy: Policy | None = None) -> PathConstraints:
    """What a request must satisfy (and violate) to follow ``path``."""
    policy = policy or path.policy
    if policy is None:
        raise ValueError("path carries no policy; pass it explicitly")
    tree = build_tree(policy)
    out: list[Constraint] = []
    reason = None

    def add(scope, target, condition, labels, outcome, failure_point):
        nonlocal reason
        parts = _parts(target, condition, labels)
        if outcome is RuleOutcome.SATISFIED:
            out.extend(Constraint(scope, el, True, text) for el, text in parts)
        elif not parts:
            out.append(Constraint(scope, labels["target"], False, "any request"))
            reason = reason or f"{scope} matches every request and cannot fail"
        elif failure_point is None:
            text = " and ".join(t if len(parts) == 1 else f"[{t}]" for _, t in parts)
            out.append(Constraint(scope, labels["target"], False, text))
        else:
            for el, text in parts:
                if el == failure_point:
                    out.append(Constraint(scope, el, False, text))
                    break
                out.append(Constraint(scope, el, True, text))

    profile = path.profile
    root_labels = {"target": tree.children(tree.root.label)[0].label,
                   "sections": [s.label for s in tree.children(tree.children(tree.root.label)[0].label)],
                   "condition": None}
    add("policy", policy.target, None, root_labels, profile.policy_target, profile.policy_failure)
    for rule, node, outcome, fp in zip(policy.rules, tree.rules(), profile.rules,
                                       profile.failure_points):
        if outcome is not RuleOutcome.NOT_EVALUATED:
            add(rule.id, rule.target, rule.condition, _labels(tree, node), outcome, fp)
    if path.unfeasible and reason is None:
        reason = "requires an unconditional element to fail"
    return PathConstraints(tuple(out), path.unfeasible, reason if path.unfeasible else None)
