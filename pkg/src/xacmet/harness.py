"""Differential experiments: path oracle versus direct evaluation."""

from __future__ import annotations

import itertools
import math
import re
from collections.abc import Callable, Iterable, Sequence
from pathlib import Path
from dataclasses import dataclass, field
from typing import Any

from .errors import DomainTooLarge, XacmlError
from .model import CATEGORIES, Decision, Policy, Request
from .oracle import evaluate
from .paths import DEFAULT_MAX_PATHS, PathSet, build_paths
from .reference import evaluate_direct
from .xacml_io import (
    mine_attribute_values,
    parse_policy,
    parse_request,
    parse_response,
    write_request,
)

DEFAULT_MAX_REQUESTS = 200_000

# Any callable with this shape can stand in for the reference evaluator,
# e.g. a wrapper around an external PDP process.
Evaluator = Callable[[Policy, Request], Decision]


def domain_size(policy: Policy) -> int:
    """Number of requests the untruncated enumeration would produce."""
    return math.prod(len(v) + 1 for v in mine_attribute_values(policy).values())


def enumerate_requests(policy: Policy, limit: int | None = None,
                       max_requests: int = DEFAULT_MAX_REQUESTS) -> list[Request]:
    """Cross product of the mined domains, each attribute single-valued or absent.

    The first request is always the empty one. With ``limit`` the product is
    truncated (deterministically, in product order); without it, a product
    larger than ``max_requests`` raises DomainTooLarge.
    """
    if limit is not None and limit < 1:
        raise ValueError("limit must be a positive integer")
    domains = mine_attribute_values(policy)
    keys = list(domains)
    total = math.prod(len(domains[k]) + 1 for k in keys)
    if limit is None and total > max_requests:
        raise DomainTooLarge(
            f"{total} requests in the full enumeration (bound {max_requests}); pass a limit")
    choices = [(None,) + domains[k] for k in keys]
    combos = itertools.product(*choices)
    if limit is not None:
        combos = itertools.islice(combos, limit)
    requests = []
    for combo in combos:
        bags: dict[Any, list] = {c: [] for c in CATEGORIES}
        for (category, attribute_id), value in zip(keys, combo):
            if value is not None:
                bags[category].append((attribute_id, value))
        requests.append(Request.of(*(bags[c] for c in CATEGORIES)))
    return requests


@dataclass(frozen=True)
class Disagreement:
    index: int
    request: Request
    oracle: Decision
    reference: Decision
    covered_path_rank: int

    def as_dict(self) -> dict[str, Any]:
        return {"index": self.index, "oracle": self.oracle.value,
                "reference": self.reference.value, "rank": self.covered_path_rank,
                "request": write_request(self.request)}


@dataclass(frozen=True)
class DiffReport:
    policy_id: str
    request_count: int
    agreement_count: int
    disagreements: tuple[Disagreement, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.disagreements

    @property
    def agreement(self) -> float:
        return 1.0 if not self.request_count else self.agreement_count / self.request_count

    def as_dict(self) -> dict[str, Any]:
        return {
            "policy": self.policy_id,
            "requests": self.request_count,
            "agreements": self.agreement_count,
            "disagreements": [d.as_dict() for d in self.disagreements],
        }

    def to_text(self) -> str:
        lines = [f"{self.policy_id}: {self.agreement_count}/{self.request_count} agree"
                 f" ({100 * self.agreement:.1f}%)"]
        for d in self.disagreements:
            lines.append(f"  request #{d.index}: oracle={d.oracle.value} "
                         f"reference={d.reference.value} path={d.covered_path_rank}")
        return "\n".join(lines) + "\n"


def differential_check(policy: Policy, requests: Iterable[Request],
                       reference: Evaluator = evaluate_direct,
                       paths: PathSet | None = None,
                       granularity: str = "rule",
                       max_paths: int = DEFAULT_MAX_PATHS) -> DiffReport:
    if paths is None:
        paths = build_paths(policy, granularity, max_paths)
    agree = 0
    count = 0
    bad = []
    for i, request in enumerate(requests):
        count += 1
        result = evaluate(paths, request)
        expected = reference(policy, request)
        if result.verdict is expected:
            agree += 1
        else:
            bad.append(Disagreement(i, request, result.verdict, expected,
                                    result.covered_path_rank))
    return DiffReport(policy.id, count, agree, tuple(bad))


def run_corpus(policies: Sequence[Policy], limit: int | None = None,
               granularity: str = "rule") -> list[DiffReport]:
    """Exhaustive (or truncated) differential check over several policies."""
    return [differential_check(p, enumerate_requests(p, limit), granularity=granularity)
            for p in policies]


CONFORMANCE_GROUPS = ("IIA", "IIB", "IIC", "IID")
_CASE = re.compile(r"^(II[A-D]\d{3})Policy\.xml$")


@dataclass(frozen=True)
class ConformanceCase:
    name: str
    policy: Policy
    request: Request
    expected: Decision


def load_conformance(directory, groups: Sequence[str] = CONFORMANCE_GROUPS):
    """Supported cases of an unpacked XACML 2.0 conformance suite.

    A case is kept when its policy, request and response all parse within
    the supported subset and the expected decision is not Indeterminate.
    Returns ``(cases, skipped)`` where ``skipped`` maps case names to the
    reason they were left out.
    """
    cases, skipped = [], {}
    for policy_file in sorted(Path(directory).glob("*Policy.xml")):
        m = _CASE.match(policy_file.name)
        if not m or m.group(1)[:3] not in groups:
            continue
        name = m.group(1)
        request_file = policy_file.with_name(f"{name}Request.xml")
        response_file = policy_file.with_name(f"{name}Response.xml")
        if not (request_file.exists() and response_file.exists()):
            skipped[name] = "missing request or response"
            continue
        try:
            policy = parse_policy(policy_file.read_bytes())
            request = parse_request(request_file.read_bytes())
            response = parse_response(response_file.read_bytes())
        except XacmlError as exc:
            skipped[name] = str(exc)
            continue
        if response.folded:
            skipped[name] = "expects Indeterminate"
            continue
        cases.append(ConformanceCase(name, policy, request, response.decision))
    return cases, skipped
