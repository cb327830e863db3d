"""The supported function whitelist: signatures, type checking and evaluation.

A type is a ``(DataType, is_bag)`` pair. Runtime errors raise
:class:`EvaluationError`; callers fold them to ``False``.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

from .errors import MalformedPolicy, UnsupportedFunction
from .model import (
    Apply,
    AttributeValue,
    CATEGORIES,
    ConditionExpr,
    DataType,
    DesignatorBag,
    Literal,
    TargetSpec,
)

PREFIX = "urn:oasis:names:tc:xacml:1.0:function:"

Type = tuple[DataType, bool]
BOOL: Type = (DataType.BOOLEAN, False)


class EvaluationError(Exception):
    """Indeterminate at runtime (bad bag size, ...)."""


@dataclass(frozen=True)
class FunctionSpec:
    name: str
    params: tuple[Type, ...]
    returns: Type
    impl: Callable
    variadic: bool = False  # params[-1] repeats, len(params) is the minimum arity
    match_ok: bool = False  # usable as a MatchId in targets

    @property
    def urn(self) -> str:
        return PREFIX + self.name


def _prim(dt: DataType) -> Type:
    return (dt, False)


def _bag(dt: DataType) -> Type:
    return (dt, True)


def _one_and_only(bag):
    if len(bag) != 1:
        raise EvaluationError(f"one-and-only over a bag of size {len(bag)}")
    return bag[0]


def _int(value: int) -> AttributeValue:
    return AttributeValue(DataType.INTEGER, str(value))


def _bool(value: bool) -> AttributeValue:
    return AttributeValue(DataType.BOOLEAN, "true" if value else "false")


def _build_registry() -> dict[str, FunctionSpec]:
    specs: list[FunctionSpec] = []
    for dt in DataType:
        specs.append(FunctionSpec(
            f"{dt.value}-equal", (_prim(dt), _prim(dt)), BOOL,
            lambda a, b: a.value == b.value, match_ok=True))
        specs.append(FunctionSpec(
            f"{dt.value}-one-and-only", (_bag(dt),), _prim(dt), _one_and_only))
    integer = _prim(DataType.INTEGER)
    specs += [
        FunctionSpec("integer-add", (integer, integer), integer,
                     lambda *xs: sum(x.value for x in xs), variadic=True),
        FunctionSpec("integer-subtract", (integer, integer), integer,
                     lambda a, b: a.value - b.value),
        FunctionSpec("integer-multiply", (integer, integer), integer,
                     _product, variadic=True),
        FunctionSpec("integer-greater-than", (integer, integer), BOOL,
                     lambda a, b: a.value > b.value, match_ok=True),
        FunctionSpec("integer-less-than", (integer, integer), BOOL,
                     lambda a, b: a.value < b.value, match_ok=True),
        FunctionSpec("and", (BOOL,), BOOL,
                     lambda *xs: all(x.value for x in xs), variadic=True),
        FunctionSpec("or", (BOOL,), BOOL,
                     lambda *xs: any(x.value for x in xs), variadic=True),
        FunctionSpec("not", (BOOL,), BOOL, lambda a: not a.value),
        FunctionSpec("string-is-in", (_prim(DataType.STRING), _bag(DataType.STRING)), BOOL,
                     lambda a, bag: a in bag),
    ]
    return {spec.urn: spec for spec in specs}


def _product(*xs):
    out = 1
    for x in xs:
        out *= x.value
    return out


REGISTRY = _build_registry()
FUNCTION_IDS = tuple(REGISTRY)
MATCH_FUNCTION_IDS = tuple(urn for urn, spec in REGISTRY.items() if spec.match_ok)


def lookup(function_id: str, location: str | None = None) -> FunctionSpec:
    try:
        return REGISTRY[function_id.strip()]
    except KeyError:
        raise UnsupportedFunction(f"unsupported function {function_id!r}", location) from None


def _coerce(spec: FunctionSpec, raw) -> AttributeValue:
    dt, is_bag = spec.returns
    if dt is DataType.BOOLEAN:
        return _bool(raw)
    if dt is DataType.INTEGER and not isinstance(raw, AttributeValue):
        return _int(raw)
    return raw


def apply(spec: FunctionSpec, args: list):
    return _coerce(spec, spec.impl(*args))


def _param_types(spec: FunctionSpec, arity: int) -> tuple[Type, ...] | None:
    if spec.variadic:
        if spec.name in ("and", "or"):
            return (BOOL,) * arity
        if arity < len(spec.params):
            return None
        return spec.params + (spec.params[-1],) * (arity - len(spec.params))
    if arity != len(spec.params):
        return None
    return spec.params


def type_of(expr: ConditionExpr, location: str | None = None) -> Type:
    """Static type of a condition expression; raises on ill-typed trees."""
    if isinstance(expr, Literal):
        return _prim(expr.value.datatype)
    if isinstance(expr, DesignatorBag):
        return _bag(expr.designator.datatype)
    if isinstance(expr, Apply):
        spec = lookup(expr.function_id, location)
        expected = _param_types(spec, len(expr.args))
        if expected is None:
            raise MalformedPolicy(
                f"{spec.name} does not take {len(expr.args)} argument(s)", location)
        for i, (arg, want) in enumerate(zip(expr.args, expected)):
            got = type_of(arg, location)
            if got != want:
                raise MalformedPolicy(
                    f"argument {i + 1} of {spec.name} has type {_show(got)}, "
                    f"expected {_show(want)}", location)
        return spec.returns
    raise MalformedPolicy(f"unknown expression node {expr!r}", location)


def _show(t: Type) -> str:
    return f"bag<{t[0].value}>" if t[1] else t[0].value


def check_condition(expr: ConditionExpr, location: str | None = None) -> None:
    if type_of(expr, location) != BOOL:
        raise MalformedPolicy("condition does not evaluate to a boolean", location)


def check_target(target: TargetSpec, location: str | None = None) -> None:
    for cat in CATEGORIES:
        for conj in target.alternatives(cat):
            for pred in conj:
                spec = lookup(pred.function_id, location)
                if not spec.match_ok:
                    raise UnsupportedFunction(
                        f"{spec.name} cannot be used as a match function", location)
                want = spec.params[0][0]
                if pred.literal.datatype is not want or pred.designator.datatype is not want:
                    raise MalformedPolicy(
                        f"{spec.name} match needs {want.value} operands", location)
