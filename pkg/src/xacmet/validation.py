"""Input coercion helpers shared by the estimator wrappers and the CLI."""

from __future__ import annotations

import os
from collections.abc import Iterable, Mapping
from pathlib import Path

from .model import Policy, Request
from .xacml_io import parse_policy, parse_request

GRANULARITIES = ("rule", "element")


def _read_source(source) -> str | bytes | None:
    if isinstance(source, bytes):
        return source
    if isinstance(source, os.PathLike):
        return Path(source).read_bytes()
    if isinstance(source, str):
        if source.lstrip().startswith("<"):
            return source
        return Path(source).read_bytes()
    return None


def check_policy(policy) -> Policy:
    """Accept a Policy, XML text/bytes, or a path to an XML file."""
    if isinstance(policy, Policy):
        return policy
    text = _read_source(policy)
    if text is None:
        raise TypeError(f"expected a Policy, XML text or a file path, got {type(policy).__name__}")
    return parse_policy(text)


def check_request(request) -> Request:
    if isinstance(request, Request):
        return request
    if isinstance(request, Mapping):
        return Request.of(**request)
    text = _read_source(request)
    if text is None:
        raise TypeError(f"expected a Request, XML text or a file path, got {type(request).__name__}")
    return parse_request(text)


def check_requests(requests) -> list[Request]:
    """Coerce one request or an iterable of them into a list of Request."""
    if isinstance(requests, (Request, Mapping, bytes, str, os.PathLike)):
        return [check_request(requests)]
    if not isinstance(requests, Iterable):
        raise TypeError(f"expected requests, got {type(requests).__name__}")
    return [check_request(r) for r in requests]


def check_granularity(granularity: str) -> str:
    if granularity not in GRANULARITIES:
        raise ValueError(f"granularity must be one of {GRANULARITIES}, got {granularity!r}")
    return granularity


def check_positive(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return value
