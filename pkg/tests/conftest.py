from __future__ import annotations

import re

import pytest

import xacmet
from xacmet.functions import PREFIX
from xacmet.model import (
    SUBJECT_ID,
    AttributeValue,
    Category,
    CombiningAlgorithm,
    DataType,
    Designator,
    Effect,
    MatchPredicate,
    Policy,
    Rule,
    TargetSpec,
)

SUBJECT = Designator(Category.SUBJECT, SUBJECT_ID, DataType.STRING)


@pytest.fixture(scope="session")
def library():
    return xacmet.library_policy()


@pytest.fixture(scope="session")
def canonical():
    # rule A only, both rules, rule B only, neither
    return xacmet.canonical_requests()


def subject_is(name: str) -> TargetSpec:
    pred = MatchPredicate(PREFIX + "string-equal", AttributeValue.of(name), SUBJECT)
    return TargetSpec(((pred,),))


def uniform_policy(algorithm: CombiningAlgorithm, effect: Effect, n: int) -> Policy:
    """n rules of one effect, each keyed on a distinct subject name."""
    rules = tuple(Rule(f"r{i}", effect, subject_is(f"user{i}")) for i in range(n))
    return Policy("uniform", algorithm, rules)


_ID = r'(?:"(?:[^"\\]|\\.)*"|[A-Za-z_][A-Za-z0-9_]*)'
_ATTRS = rf"\[\s*{_ID}\s*=\s*{_ID}(?:\s*,\s*{_ID}\s*=\s*{_ID})*\s*\]"
_NODE = re.compile(rf"^\s*({_ID})\s*(?:{_ATTRS})?\s*;$")
_EDGE = re.compile(rf"^\s*({_ID})\s*->\s*({_ID})\s*(?:{_ATTRS})?\s*;$")
_DEFAULTS = re.compile(rf"^\s*(?:node|edge|graph)\s*{_ATTRS}\s*;$")


def check_dot(text: str) -> tuple[set[str], list[tuple[str, str]]]:
    """Minimal grammar check for the digraph subset we emit.

    Returns declared node ids and edges; fails on any unparsable line or an
    edge touching an undeclared node.
    """
    lines = text.strip().splitlines()
    assert re.match(rf"^digraph\s+{_ID}\s*\{{$", lines[0]), lines[0]
    assert lines[-1] == "}"
    nodes, edges = set(), []
    for line in lines[1:-1]:
        if _DEFAULTS.match(line):
            continue
        m = _EDGE.match(line)
        if m:
            edges.append((m.group(1), m.group(2)))
            continue
        m = _NODE.match(line)
        assert m, f"not a DOT statement: {line!r}"
        nodes.add(m.group(1))
    for a, b in edges:
        assert a in nodes and b in nodes, (a, b)
    return nodes, edges


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
