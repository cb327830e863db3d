"""Core policy and request types.

Everything here is immutable. Attribute values are stored in canonical
lexical form so that value equality is plain dataclass equality.
"""

from __future__ import annotations

import datetime as _dt
import enum
import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from typing import Any, Union

from .errors import MalformedPolicy, UnsupportedDatatype

XSD = "http://www.w3.org/2001/XMLSchema#"

SUBJECT_ID = "urn:oasis:names:tc:xacml:1.0:subject:subject-id"
RESOURCE_ID = "urn:oasis:names:tc:xacml:1.0:resource:resource-id"
ACTION_ID = "urn:oasis:names:tc:xacml:1.0:action:action-id"


class DataType(str, enum.Enum):
    STRING = "string"
    INTEGER = "integer"
    BOOLEAN = "boolean"
    DOUBLE = "double"
    ANY_URI = "anyURI"
    DATE = "date"
    TIME = "time"

    @property
    def uri(self) -> str:
        return XSD + self.value

    @classmethod
    def from_uri(cls, uri: str) -> "DataType":
        uri = uri.strip()
        if uri.startswith(XSD):
            name = uri[len(XSD):]
            for member in cls:
                if member.value == name:
                    return member
        raise UnsupportedDatatype(f"unsupported datatype {uri!r}")


def _parse_boolean(text: str) -> bool:
    if text in ("true", "1"):
        return True
    if text in ("false", "0"):
        return False
    raise ValueError(text)


def _parse_double(text: str) -> float:
    value = float(text)
    if math.isnan(value):
        raise ValueError(text)
    return value + 0.0  # folds -0.0 into 0.0


_PARSERS = {
    DataType.STRING: str,
    DataType.ANY_URI: str,
    DataType.INTEGER: int,
    DataType.BOOLEAN: _parse_boolean,
    DataType.DOUBLE: _parse_double,
    DataType.DATE: _dt.date.fromisoformat,
    DataType.TIME: _dt.time.fromisoformat,
}


def _format(datatype: DataType, value: Any) -> str:
    if datatype is DataType.BOOLEAN:
        return "true" if value else "false"
    if datatype is DataType.DOUBLE:
        return repr(float(value))
    if datatype in (DataType.DATE, DataType.TIME):
        return value.isoformat()
    return str(value)


@dataclass(frozen=True)
class AttributeValue:
    """A typed literal; ``literal`` is canonicalized on construction."""

    datatype: DataType
    literal: str
    value: Any = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        datatype = DataType(self.datatype)
        text = self.literal.strip()
        try:
            value = _PARSERS[datatype](text)
        except (ValueError, TypeError):
            raise MalformedPolicy(
                f"{self.literal!r} is not a valid {datatype.value}") from None
        object.__setattr__(self, "datatype", datatype)
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "literal", _format(datatype, value))

    @classmethod
    def of(cls, value: Any, datatype: DataType | str | None = None) -> "AttributeValue":
        """Build from a Python value, guessing the datatype when not given."""
        if isinstance(value, AttributeValue):
            return value
        if datatype is None:
            if isinstance(value, bool):
                datatype = DataType.BOOLEAN
            elif isinstance(value, int):
                datatype = DataType.INTEGER
            elif isinstance(value, float):
                datatype = DataType.DOUBLE
            elif isinstance(value, _dt.date):
                datatype = DataType.DATE
            elif isinstance(value, _dt.time):
                datatype = DataType.TIME
            else:
                datatype = DataType.STRING
        datatype = DataType(datatype)
        literal = value if isinstance(value, str) else _format(datatype, value)
        return cls(datatype, literal)

    def __str__(self) -> str:
        return self.literal


class Category(str, enum.Enum):
    SUBJECT = "Subject"
    RESOURCE = "Resource"
    ACTION = "Action"
    ENVIRONMENT = "Environment"

    @property
    def plural(self) -> str:
        return self.value + "s"


CATEGORIES = tuple(Category)


class Effect(str, enum.Enum):
    PERMIT = "Permit"
    DENY = "Deny"


class Decision(str, enum.Enum):
    PERMIT = "Permit"
    DENY = "Deny"
    NOT_APPLICABLE = "NotApplicable"

    @classmethod
    def from_effect(cls, effect: Effect) -> "Decision":
        return cls(Effect(effect).value)


class CombiningAlgorithm(str, enum.Enum):
    FIRST_APPLICABLE = "FirstApplicable"
    DENY_OVERRIDES = "DenyOverrides"
    PERMIT_OVERRIDES = "PermitOverrides"

    @property
    def urn(self) -> str:
        return ("urn:oasis:names:tc:xacml:1.0:rule-combining-algorithm:"
                + _RCA_SUFFIX[self])

    @classmethod
    def from_urn(cls, urn: str) -> "CombiningAlgorithm":
        suffix = urn.strip().rsplit(":", 1)[-1]
        for member, name in _RCA_SUFFIX.items():
            if name == suffix:
                return member
        raise ValueError(urn)


_RCA_SUFFIX = {
    CombiningAlgorithm.FIRST_APPLICABLE: "first-applicable",
    CombiningAlgorithm.DENY_OVERRIDES: "deny-overrides",
    CombiningAlgorithm.PERMIT_OVERRIDES: "permit-overrides",
}


@dataclass(frozen=True)
class Designator:
    category: Category
    attribute_id: str
    datatype: DataType

    @property
    def key(self) -> tuple[Category, str]:
        return (self.category, self.attribute_id)


class AttributeBag:
    """Multiset of ``(attribute_id, AttributeValue)`` entries for one category."""

    __slots__ = ("entries", "_index")

    def __init__(self, entries: Iterable[tuple[str, AttributeValue]] = ()):
        self.entries = tuple((aid, AttributeValue.of(v)) for aid, v in entries)
        index: dict[tuple[str, DataType], list[AttributeValue]] = {}
        for aid, value in self.entries:
            index.setdefault((aid, value.datatype), []).append(value)
        self._index = {k: tuple(v) for k, v in index.items()}

    def values(self, attribute_id: str, datatype: DataType) -> tuple[AttributeValue, ...]:
        return self._index.get((attribute_id, datatype), ())

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AttributeBag):
            return NotImplemented
        return sorted(self.entries, key=_entry_key) == sorted(other.entries, key=_entry_key)

    def __hash__(self) -> int:
        return hash(tuple(sorted(self.entries, key=_entry_key)))

    def __repr__(self) -> str:
        return f"AttributeBag({list(self.entries)!r})"


def _entry_key(entry):
    aid, value = entry
    return (aid, value.datatype.value, value.literal)


BagSpec = Union[AttributeBag, Mapping[str, Any], Iterable[tuple[str, Any]], None]


def _to_bag(spec: BagSpec) -> AttributeBag:
    if spec is None:
        return AttributeBag()
    if isinstance(spec, AttributeBag):
        return spec
    if isinstance(spec, Mapping):
        entries = []
        for aid, values in spec.items():
            if isinstance(values, (list, tuple, set, frozenset)):
                entries.extend((aid, v) for v in values)
            else:
                entries.append((aid, values))
        return AttributeBag(entries)
    return AttributeBag(spec)


@dataclass(frozen=True)
class Request:
    """Four attribute bags, one per category."""

    subject: AttributeBag = field(default_factory=AttributeBag)
    resource: AttributeBag = field(default_factory=AttributeBag)
    action: AttributeBag = field(default_factory=AttributeBag)
    environment: AttributeBag = field(default_factory=AttributeBag)

    @classmethod
    def of(cls, subject: BagSpec = None, resource: BagSpec = None,
           action: BagSpec = None, environment: BagSpec = None) -> "Request":
        """Convenience constructor.

        Each argument may be a mapping ``attribute_id -> value or list of
        values``; plain ``str`` values become ``xs:string``.
        """
        return cls(_to_bag(subject), _to_bag(resource), _to_bag(action),
                   _to_bag(environment))

    def bag(self, category: Category) -> AttributeBag:
        return getattr(self, Category(category).name.lower())

    def values(self, designator: Designator) -> tuple[AttributeValue, ...]:
        return self.bag(designator.category).values(designator.attribute_id,
                                                    designator.datatype)


@dataclass(frozen=True)
class MatchPredicate:
    function_id: str
    literal: AttributeValue
    designator: Designator


@dataclass(frozen=True)
class TargetSpec:
    """Per category, a disjunction of conjunctions of match predicates.

    An empty tuple for a category means "any".
    """

    subjects: tuple[tuple[MatchPredicate, ...], ...] = ()
    resources: tuple[tuple[MatchPredicate, ...], ...] = ()
    actions: tuple[tuple[MatchPredicate, ...], ...] = ()
    environments: tuple[tuple[MatchPredicate, ...], ...] = ()

    def __post_init__(self):
        for cat in CATEGORIES:
            alts = tuple(tuple(conj) for conj in getattr(self, cat.plural.lower()))
            for conj in alts:
                if not conj:
                    raise MalformedPolicy(f"empty {cat.value} element in target")
                for pred in conj:
                    if pred.designator.category is not cat:
                        raise MalformedPolicy(
                            f"{pred.designator.category.value} designator inside {cat.value} match")
            object.__setattr__(self, cat.plural.lower(), alts)

    def alternatives(self, category: Category) -> tuple[tuple[MatchPredicate, ...], ...]:
        return getattr(self, Category(category).plural.lower())

    @property
    def is_empty(self) -> bool:
        return not any(self.alternatives(c) for c in CATEGORIES)

    def categories(self) -> list[Category]:
        """Constrained categories in document order."""
        return [c for c in CATEGORIES if self.alternatives(c)]


ANY_TARGET = TargetSpec()


@dataclass(frozen=True)
class Literal:
    value: AttributeValue


@dataclass(frozen=True)
class DesignatorBag:
    designator: Designator


@dataclass(frozen=True)
class Apply:
    function_id: str
    args: tuple["ConditionExpr", ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))


ConditionExpr = Union[Literal, DesignatorBag, Apply]


@dataclass(frozen=True)
class Rule:
    id: str
    effect: Effect
    target: TargetSpec = ANY_TARGET
    condition: ConditionExpr | None = None

    def __post_init__(self):
        object.__setattr__(self, "effect", Effect(self.effect))
        from .functions import check_condition, check_target
        check_target(self.target)
        if self.condition is not None:
            check_condition(self.condition)


@dataclass(frozen=True)
class Policy:
    id: str
    rule_combining: CombiningAlgorithm
    rules: tuple[Rule, ...]
    target: TargetSpec = ANY_TARGET
    description: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "rule_combining", CombiningAlgorithm(self.rule_combining))
        object.__setattr__(self, "rules", tuple(self.rules))
        if not self.rules:
            raise MalformedPolicy(f"policy {self.id!r} has no rules")
        ids = [r.id for r in self.rules]
        if len(set(ids)) != len(ids):
            raise MalformedPolicy(f"policy {self.id!r} has duplicate rule ids")
        from .functions import check_target
        check_target(self.target)
