"""Seeded synthetic policies over the supported grammar.

Each policy draws from a small attribute pool so its request domain stays
enumerable. A rotating "focus" template guarantees that a corpus of at
least ``len(FOCUS)`` policies exercises every whitelisted function.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .functions import PREFIX
from .model import (
    Apply,
    AttributeValue,
    Category,
    CombiningAlgorithm,
    ConditionExpr,
    DataType,
    Designator,
    DesignatorBag,
    Effect,
    Literal,
    MatchPredicate,
    Policy,
    Rule,
    TargetSpec,
)

S, R, A, E = Category.SUBJECT, Category.RESOURCE, Category.ACTION, Category.ENVIRONMENT


@dataclass(frozen=True)
class PoolAttribute:
    designator: Designator
    values: tuple[str, ...]


def _attr(cat: Category, name: str, dt: DataType, *values: str) -> PoolAttribute:
    prefix = {S: "subject", R: "resource", A: "action", E: "environment"}[cat]
    return PoolAttribute(Designator(cat, f"urn:oasis:names:tc:xacml:1.0:{prefix}:{name}", dt),
                         values)


POOL = {
    "subject-id": _attr(S, "subject-id", DataType.STRING, "alice", "bob", "carol"),
    "role": _attr(S, "role", DataType.STRING, "admin", "staff"),
    "age": _attr(S, "age", DataType.INTEGER, "18", "30", "65"),
    "resource-id": _attr(R, "resource-id", DataType.STRING, "doc", "img", "log"),
    "location": _attr(R, "location", DataType.ANY_URI,
                      "http://example.org/a", "http://example.org/b"),
    "size": _attr(R, "size", DataType.DOUBLE, "1.5", "10.0"),
    "action-id": _attr(A, "action-id", DataType.STRING, "read", "write", "delete"),
    "urgent": _attr(A, "urgent", DataType.BOOLEAN, "true"),
    "current-date": _attr(E, "current-date", DataType.DATE, "2024-01-01", "2024-06-30"),
    "current-time": _attr(E, "current-time", DataType.TIME, "09:00:00", "17:00:00"),
}

_BY_TYPE = {a.designator.datatype: name for name, a in POOL.items()
            if name not in ("role",)}


def fn(name: str) -> str:
    return PREFIX + name


def _one(attr: PoolAttribute) -> Apply:
    return Apply(fn(f"{attr.designator.datatype.value}-one-and-only"),
                 (DesignatorBag(attr.designator),))


def _lit(attr: PoolAttribute, text: str) -> Literal:
    return Literal(AttributeValue(attr.designator.datatype, text))


class _Builder:
    def __init__(self, rng: random.Random, attributes: list[str], literals: dict[str, list[str]]):
        self.rng = rng
        self.attributes = attributes
        self.literals = literals

    def literal(self, name: str) -> Literal:
        return _lit(POOL[name], self.rng.choice(self.literals[name]))

    def int_literal(self) -> Literal:
        return Literal(AttributeValue(DataType.INTEGER, str(self.rng.choice(self.literals["age"]))))

    # focus templates; each returns (condition, target-match function or None)
    def equal(self, dt: DataType) -> ConditionExpr:
        name = _BY_TYPE[dt]
        return Apply(fn(f"{dt.value}-equal"), (_one(POOL[name]), self.literal(name)))

    def arithmetic(self, op: str, compare: str) -> ConditionExpr:
        age = POOL["age"]
        operand = Literal(AttributeValue(DataType.INTEGER, str(self.rng.choice([0, 1, 2]))))
        lhs = Apply(fn(f"integer-{op}"), (_one(age), operand))
        return Apply(fn(f"integer-{compare}"), (lhs, self.int_literal()))

    def is_in(self) -> ConditionExpr:
        if self.rng.random() < 0.5:
            return Apply(fn("string-is-in"),
                         (self.literal("subject-id"), DesignatorBag(POOL["subject-id"].designator)))
        return Apply(fn("string-is-in"),
                     (_one(POOL["resource-id"]), DesignatorBag(POOL["role"].designator)))

    def atom(self) -> ConditionExpr:
        choices = [self.equal(POOL[n].designator.datatype) for n in self.attributes
                   if n in _BY_TYPE.values()]
        if "age" in self.attributes:
            choices.append(self.arithmetic(self.rng.choice(["add", "subtract", "multiply"]),
                                           self.rng.choice(["greater-than", "less-than", "equal"])))
        if "subject-id" in self.attributes:
            choices.append(self.is_in())
        return self.rng.choice(choices)

    def logical(self, op: str) -> ConditionExpr:
        if op == "not":
            return Apply(fn("not"), (self.atom(),))
        return Apply(fn(op), (self.atom(), self.atom()))

    def condition(self) -> ConditionExpr:
        roll = self.rng.random()
        if roll < 0.6:
            return self.atom()
        return self.logical(self.rng.choice(["and", "or", "not"]))

    def predicate(self, name: str) -> MatchPredicate:
        attr = POOL[name]
        function = f"{attr.designator.datatype.value}-equal"
        if attr.designator.datatype is DataType.INTEGER and self.rng.random() < 0.5:
            function = self.rng.choice(["integer-greater-than", "integer-less-than"])
        return MatchPredicate(fn(function), self.literal(name).value, attr.designator)

    def target(self, max_sections: int = 4, p_section: float = 0.45) -> TargetSpec:
        sections = {}
        for cat in (S, R, A, E):
            names = [n for n in self.attributes if POOL[n].designator.category is cat]
            if not names or self.rng.random() > p_section or len(sections) >= max_sections:
                continue
            alternatives = []
            for _ in range(self.rng.randint(1, 2)):
                picked = self.rng.sample(names, k=min(len(names), self.rng.randint(1, 2)))
                alternatives.append(tuple(self.predicate(n) for n in picked))
            sections[cat] = tuple(alternatives)
        return TargetSpec(*(sections.get(c, ()) for c in (S, R, A, E)))


FOCUS = (
    [("equal", dt) for dt in DataType]
    + [("arith", "add", "greater-than"), ("arith", "subtract", "less-than"),
       ("arith", "multiply", "equal"), ("is-in",), ("and",), ("or",), ("not",),
       ("match", "integer-greater-than"), ("match", "integer-less-than")]
)

ALGORITHMS = tuple(CombiningAlgorithm)


def _focus_attributes(focus) -> list[str]:
    kind = focus[0]
    if kind == "equal":
        return [_BY_TYPE[focus[1]]]
    if kind in ("arith", "match"):
        return ["age"]
    if kind == "is-in":
        return ["subject-id", "resource-id", "role"]
    return ["subject-id"]


def generate_policy(seed: int, index: int = 0, n_attributes: int = 3,
                    algorithm: CombiningAlgorithm | None = None) -> Policy:
    rng = random.Random(f"{seed}:{index}")
    focus = FOCUS[index % len(FOCUS)]
    attributes = list(dict.fromkeys(_focus_attributes(focus)))
    others = [n for n in POOL if n not in attributes]
    attributes += rng.sample(others, k=max(0, n_attributes - len(attributes)))
    literals = {n: rng.sample(list(POOL[n].values), k=min(2, len(POOL[n].values)))
                for n in POOL}
    b = _Builder(rng, attributes, literals)
    algorithm = algorithm or ALGORITHMS[index % len(ALGORITHMS)]

    n_rules = rng.randint(1, 4)
    rules = []
    for i in range(n_rules):
        effect = rng.choice(list(Effect))
        target = b.target()
        condition = b.condition() if rng.random() < 0.5 else None
        rules.append([f"rule{i + 1}", effect, target, condition])

    focus_rule = rng.randrange(n_rules)
    kind = focus[0]
    if kind == "equal":
        rules[focus_rule][3] = b.equal(focus[1])
    elif kind == "arith":
        rules[focus_rule][3] = b.arithmetic(focus[1], focus[2])
    elif kind == "is-in":
        rules[focus_rule][3] = b.is_in()
    elif kind in ("and", "or", "not"):
        rules[focus_rule][3] = b.logical(kind)
    else:
        age = POOL["age"]
        pred = MatchPredicate(fn(focus[1]), b.int_literal().value, age.designator)
        old = rules[focus_rule][2]
        rules[focus_rule][2] = TargetSpec(((pred,),), old.resources, old.actions, old.environments)

    policy_target = b.target(max_sections=1) if rng.random() < 0.3 else TargetSpec()
    return Policy(f"generated-{seed}-{index}", algorithm,
                  tuple(Rule(*r) for r in rules), policy_target)


def generate_corpus(seed: int = 2018, count: int = 30, n_attributes: int = 3) -> list[Policy]:
    return [generate_policy(seed, i, n_attributes) for i in range(count)]


def functions_used(policy: Policy) -> set[str]:
    used = set()

    def walk(expr):
        if isinstance(expr, Apply):
            used.add(expr.function_id)
            for a in expr.args:
                walk(a)

    for target in [policy.target] + [r.target for r in policy.rules]:
        for cat in (S, R, A, E):
            for conj in target.alternatives(cat):
                used.update(p.function_id for p in conj)
    for rule in policy.rules:
        if rule.condition is not None:
            walk(rule.condition)
    return used
