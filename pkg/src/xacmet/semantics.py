"""Target matching and condition evaluation with Indeterminate folded to false."""

from __future__ import annotations

import enum

from .functions import EvaluationError, apply, lookup
from .model import (
    CATEGORIES,
    Apply,
    AttributeValue,
    Category,
    ConditionExpr,
    DesignatorBag,
    Effect,
    Literal,
    MatchPredicate,
    Request,
    Rule,
    TargetSpec,
)


class RuleResult(str, enum.Enum):
    SAT_PERMIT = "SatPermit"
    SAT_DENY = "SatDeny"
    UNSAT = "Unsat"

    @property
    def satisfied(self) -> bool:
        return self is not RuleResult.UNSAT


def match_predicate(pred: MatchPredicate, request: Request) -> bool:
    spec = lookup(pred.function_id)
    for value in request.values(pred.designator):
        try:
            if apply(spec, [pred.literal, value]).value:
                return True
        except (EvaluationError, TypeError, ValueError):
            continue
    return False


def match_alternative(conjunct, request: Request) -> bool:
    return all(match_predicate(p, request) for p in conjunct)


def match_category(target: TargetSpec, category: Category, request: Request) -> bool:
    alternatives = target.alternatives(category)
    if not alternatives:
        return True
    return any(match_alternative(conj, request) for conj in alternatives)


def match_target(target: TargetSpec, request: Request) -> bool:
    return all(match_category(target, c, request) for c in CATEGORIES)


def eval_expr(expr: ConditionExpr, request: Request):
    """Evaluate to an AttributeValue or a bag (tuple); may raise EvaluationError."""
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, DesignatorBag):
        return request.values(expr.designator)
    if isinstance(expr, Apply):
        spec = lookup(expr.function_id)
        args = [eval_expr(a, request) for a in expr.args]
        try:
            return apply(spec, args)
        except EvaluationError:
            raise
        except (TypeError, ValueError, AttributeError, OverflowError) as exc:
            raise EvaluationError(str(exc)) from exc
    raise EvaluationError(f"unknown expression {expr!r}")


def eval_condition(cond: ConditionExpr | None, request: Request) -> bool:
    if cond is None:
        return True
    try:
        result = eval_expr(cond, request)
    except EvaluationError:
        return False
    return isinstance(result, AttributeValue) and result.value is True


def eval_rule(rule: Rule, request: Request) -> RuleResult:
    if match_target(rule.target, request) and eval_condition(rule.condition, request):
        return RuleResult.SAT_PERMIT if rule.effect is Effect.PERMIT else RuleResult.SAT_DENY
    return RuleResult.UNSAT
