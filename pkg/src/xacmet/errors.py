"""Exception hierarchy shared by the parser, graph builder and path engine."""

from __future__ import annotations


class XacmetError(Exception):
    """Base class for every error raised by this package."""


class XacmlError(XacmetError, ValueError):
    """Input document could not be turned into the supported policy model.

    ``location`` is an element path such as ``/Policy/Rule[2]/Condition``.
    """

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        if location:
            message = f"{message} (at {location})"
        super().__init__(message)


class MalformedXml(XacmlError):
    pass


class MalformedPolicy(XacmlError):
    """Well-formed XML that violates the policy grammar or typing rules."""


class UnsupportedElement(XacmlError):
    pass


class UnsupportedAlgorithm(XacmlError):
    pass


class UnsupportedFunction(XacmlError):
    pass


class UnsupportedDatatype(XacmlError):
    pass


class MalformedTree(XacmetError):
    pass


class PathLimitExceeded(XacmetError):
    pass


class DomainTooLarge(XacmetError):
    pass
