"""Path-based test oracle for XACML 2.0 policies."""

from __future__ import annotations

from importlib.resources import files

from .errors import (
    DomainTooLarge,
    MalformedPolicy,
    MalformedTree,
    MalformedXml,
    PathLimitExceeded,
    UnsupportedAlgorithm,
    UnsupportedDatatype,
    UnsupportedElement,
    UnsupportedFunction,
    XacmetError,
    XacmlError,
)
from .graph import XacGraph, build_graph, color_edges, export_graph_dot
from .harness import DiffReport, differential_check, enumerate_requests
from .model import (
    AttributeValue,
    Category,
    CombiningAlgorithm,
    DataType,
    Decision,
    Effect,
    Policy,
    Request,
    Rule,
    TargetSpec,
)
from .oracle import CoverageReport, OracleResult, batch_evaluate, coverage, evaluate
from .paths import EvaluationPath, PathSet, build_paths, order_paths, unfold
from .reference import combine, evaluate_direct
from .tree import XacTree, build_tree, export_tree_dot
from .xacml_io import (
    mine_attribute_values,
    parse_policy,
    parse_request,
    parse_response,
    write_policy,
    write_request,
    write_response,
)

__version__ = "0.1.0"

CANONICAL_REQUESTS = (
    "request_rule_a_only.xml",
    "request_both_rules.xml",
    "request_rule_b_only.xml",
    "request_no_rule.xml",
)


def data_file(name: str):
    """Traversable handle on a bundled fixture (e.g. ``library_policy.xml``)."""
    return files(__name__) / "data" / name


def library_policy() -> Policy:
    return parse_policy(data_file("library_policy.xml").read_bytes())


def canonical_requests() -> list[Request]:
    return [parse_request(data_file(n).read_bytes()) for n in CANONICAL_REQUESTS]


def __getattr__(name):
    # the estimator wrappers pull in scikit-learn; import them on first use
    if name in ("XacmetOracle", "ReferencePDP"):
        from . import estimator
        return getattr(estimator, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
