"""Direct evaluation of a policy, with no graph and no paths.

Serves as the independent side of the differential check, so it must only
depend on the matching and condition primitives.
"""

from __future__ import annotations

from collections.abc import Iterable

from .model import CombiningAlgorithm, Decision, Policy, Request
from .semantics import RuleResult, eval_rule, match_target


def combine(algorithm: CombiningAlgorithm, outcomes: Iterable[RuleResult]) -> Decision:
    outcomes = [RuleResult(o) for o in outcomes]
    if algorithm is CombiningAlgorithm.FIRST_APPLICABLE:
        for o in outcomes:
            if o is RuleResult.SAT_PERMIT:
                return Decision.PERMIT
            if o is RuleResult.SAT_DENY:
                return Decision.DENY
        return Decision.NOT_APPLICABLE
    if algorithm is CombiningAlgorithm.DENY_OVERRIDES:
        first, second = RuleResult.SAT_DENY, RuleResult.SAT_PERMIT
    else:
        first, second = RuleResult.SAT_PERMIT, RuleResult.SAT_DENY
    if first in outcomes:
        return Decision.PERMIT if first is RuleResult.SAT_PERMIT else Decision.DENY
    if second in outcomes:
        return Decision.PERMIT if second is RuleResult.SAT_PERMIT else Decision.DENY
    return Decision.NOT_APPLICABLE


def evaluate_direct(policy: Policy, request: Request) -> Decision:
    if not match_target(policy.target, request):
        return Decision.NOT_APPLICABLE
    return combine(policy.rule_combining, (eval_rule(r, request) for r in policy.rules))
