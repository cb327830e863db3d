"""XACML 2.0 reading and writing for the supported subset.

Elements are matched by local name, so both the policy and the context
namespaces are accepted. Anything outside the subset raises instead of
being skipped: an oracle that silently drops a constraint gives wrong
verdicts.
"""

from __future__ import annotations

import datetime as _dt
import xml.etree.ElementTree as ET
from collections import defaultdict
from dataclasses import dataclass

from .errors import (
    MalformedPolicy,
    MalformedXml,
    UnsupportedAlgorithm,
    UnsupportedDatatype,
    UnsupportedElement,
)
from .functions import check_condition, lookup
from .model import (
    CATEGORIES,
    Apply,
    AttributeBag,
    AttributeValue,
    Category,
    CombiningAlgorithm,
    ConditionExpr,
    DataType,
    Decision,
    Designator,
    DesignatorBag,
    Effect,
    Literal,
    MatchPredicate,
    Policy,
    Request,
    Rule,
    TargetSpec,
)

POLICY_NS = "urn:oasis:names:tc:xacml:2.0:policy:schema:os"
CONTEXT_NS = "urn:oasis:names:tc:xacml:2.0:context:schema:os"
STATUS_OK = "urn:oasis:names:tc:xacml:1.0:status:ok"
ACCESS_SUBJECT = "urn:oasis:names:tc:xacml:1.0:subject-category:access-subject"

NOMATCH = "___XACMET_NOMATCH___"

_DESIGNATOR_TAGS = {f"{c.value}AttributeDesignator": c for c in CATEGORIES}


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1] if isinstance(tag, str) else ""


def _parse_xml(xml_text: str | bytes) -> ET.Element:
    try:
        return ET.fromstring(xml_text)
    except ET.ParseError as exc:
        raise MalformedXml(f"malformed XML: {exc}") from None


def _children(elem: ET.Element) -> list[ET.Element]:
    # comments and processing instructions are dropped by the default parser
    return [c for c in elem if isinstance(c.tag, str)]


def _check_attrs(elem: ET.Element, allowed: set[str], where: str) -> None:
    for name in elem.attrib:
        if name.startswith("{"):
            continue  # xsi:schemaLocation and friends
        if name not in allowed:
            raise UnsupportedElement(
                f"unsupported attribute {name!r} on {_local(elem.tag)}", where)


def _require(elem: ET.Element, name: str, where: str) -> str:
    value = elem.get(name)
    if value is None:
        raise MalformedPolicy(f"{_local(elem.tag)} is missing {name}", where)
    return value


def _check_no_children(elem: ET.Element, where: str) -> None:
    kids = _children(elem)
    if kids:
        raise UnsupportedElement(f"unexpected element {_local(kids[0].tag)}", where)


class _Paths:
    """Builds ``/Policy/Rule[2]/Target`` style locations."""

    def __init__(self, base: str):
        self.base = base
        self.counts: dict[str, int] = defaultdict(int)

    def child(self, elem: ET.Element) -> str:
        name = _local(elem.tag)
        self.counts[name] += 1
        return f"{self.base}/{name}[{self.counts[name]}]"


# -- policies ---------------------------------------------------------------


def parse_policy(xml_text: str | bytes) -> Policy:
    root = _parse_xml(xml_text)
    name = _local(root.tag)
    if name == "PolicySet":
        raise UnsupportedElement("PolicySet is not supported; supply a single Policy", "/PolicySet")
    if name != "Policy":
        raise UnsupportedElement(f"expected a Policy document, found {name}", f"/{name}")
    where = "/Policy"
    _check_attrs(root, {"PolicyId", "RuleCombiningAlgId", "Version"}, where)
    policy_id = _require(root, "PolicyId", where)
    alg_urn = _require(root, "RuleCombiningAlgId", where)
    try:
        algorithm = CombiningAlgorithm.from_urn(alg_urn)
    except ValueError:
        raise UnsupportedAlgorithm(f"unsupported rule combining algorithm {alg_urn!r}", where) from None

    description = None
    target = None
    rules = []
    paths = _Paths(where)
    for child in _children(root):
        name = _local(child.tag)
        loc = paths.child(child)
        if name == "Description" and target is None and not rules:
            description = (child.text or "").strip()
        elif name == "Target" and target is None and not rules:
            target = _parse_target(child, loc)
        elif name == "Rule":
            rules.append(_parse_rule(child, loc))
        else:
            raise UnsupportedElement(f"unsupported or misplaced element {name}", loc)
    if not rules:
        raise MalformedPolicy("policy has no Rule elements", where)
    return Policy(policy_id, algorithm, tuple(rules), target or TargetSpec(), description)


def _parse_rule(elem: ET.Element, where: str) -> Rule:
    _check_attrs(elem, {"RuleId", "Effect"}, where)
    rule_id = _require(elem, "RuleId", where)
    effect_text = _require(elem, "Effect", where)
    try:
        effect = Effect(effect_text.strip())
    except ValueError:
        raise MalformedPolicy(f"bad Effect {effect_text!r}", where) from None
    target = TargetSpec()
    condition = None
    seen: list[str] = []
    paths = _Paths(where)
    for child in _children(elem):
        name = _local(child.tag)
        loc = paths.child(child)
        if name == "Description" and not seen:
            pass
        elif name == "Target" and not seen:
            target = _parse_target(child, loc)
        elif name == "Condition" and "Condition" not in seen:
            condition = _parse_condition(child, loc)
        else:
            raise UnsupportedElement(f"unsupported or misplaced element {name}", loc)
        seen.append(name)
    try:
        return Rule(rule_id, effect, target, condition)
    except MalformedPolicy as exc:
        raise MalformedPolicy(str(exc), where) from None


def _parse_target(elem: ET.Element, where: str) -> TargetSpec:
    _check_attrs(elem, set(), where)
    sections: dict[Category, tuple] = {}
    order = [c.plural for c in CATEGORIES]
    last = -1
    paths = _Paths(where)
    for child in _children(elem):
        name = _local(child.tag)
        loc = paths.child(child)
        if name not in order or order.index(name) <= last:
            raise UnsupportedElement(f"unsupported or misplaced element {name}", loc)
        last = order.index(name)
        category = CATEGORIES[last]
        sections[category] = _parse_section(child, category, loc)
    return TargetSpec(*(sections.get(c, ()) for c in CATEGORIES))


def _parse_section(elem: ET.Element, category: Category, where: str) -> tuple:
    _check_attrs(elem, set(), where)
    alternatives = []
    paths = _Paths(where)
    for child in _children(elem):
        loc = paths.child(child)
        if _local(child.tag) != category.value:
            raise UnsupportedElement(f"unsupported element {_local(child.tag)}", loc)
        _check_attrs(child, set(), loc)
        conj = []
        inner = _Paths(loc)
        for match in _children(child):
            mloc = inner.child(match)
            if _local(match.tag) != f"{category.value}Match":
                raise UnsupportedElement(f"unsupported element {_local(match.tag)}", mloc)
            conj.append(_parse_match(match, category, mloc))
        if not conj:
            raise MalformedPolicy(f"empty {category.value} element", loc)
        alternatives.append(tuple(conj))
    if not alternatives:
        raise MalformedPolicy(f"empty {category.plural} element", where)
    return tuple(alternatives)


def _parse_match(elem: ET.Element, category: Category, where: str) -> MatchPredicate:
    _check_attrs(elem, {"MatchId"}, where)
    function_id = _require(elem, "MatchId", where).strip()
    lookup(function_id, where)
    kids = _children(elem)
    if len(kids) != 2 or _local(kids[0].tag) != "AttributeValue":
        raise MalformedPolicy("a match needs an AttributeValue followed by a designator", where)
    literal = _parse_value(kids[0], where + "/AttributeValue")
    designator = _parse_designator(kids[1], where + "/" + _local(kids[1].tag))
    if designator.category is not category:
        raise MalformedPolicy(
            f"{designator.category.value} designator inside a {category.value}Match", where)
    return MatchPredicate(function_id, literal, designator)


def _parse_value(elem: ET.Element, where: str) -> AttributeValue:
    _check_attrs(elem, {"DataType"}, where)
    _check_no_children(elem, where)
    datatype = _datatype(_require(elem, "DataType", where), where)
    try:
        return AttributeValue(datatype, elem.text or "")
    except MalformedPolicy as exc:
        raise MalformedPolicy(str(exc), where) from None


def _datatype(uri: str, where: str) -> DataType:
    try:
        return DataType.from_uri(uri)
    except UnsupportedDatatype as exc:
        raise UnsupportedDatatype(str(exc), where) from None


def _parse_designator(elem: ET.Element, where: str) -> Designator:
    name = _local(elem.tag)
    if name not in _DESIGNATOR_TAGS:
        raise UnsupportedElement(f"unsupported element {name}", where)
    category = _DESIGNATOR_TAGS[name]
    allowed = {"AttributeId", "DataType", "MustBePresent"}
    if category is Category.SUBJECT:
        allowed.add("SubjectCategory")
    _check_attrs(elem, allowed, where)
    _check_no_children(elem, where)
    subject_category = elem.get("SubjectCategory")
    if subject_category is not None and subject_category.strip() != ACCESS_SUBJECT:
        raise UnsupportedElement(f"unsupported SubjectCategory {subject_category!r}", where)
    attribute_id = _require(elem, "AttributeId", where).strip()
    datatype = _datatype(_require(elem, "DataType", where), where)
    return Designator(category, attribute_id, datatype)


def _parse_condition(elem: ET.Element, where: str) -> ConditionExpr:
    _check_attrs(elem, set(), where)
    kids = _children(elem)
    if not kids:
        # an empty Condition is kept as an explicit constant so the element survives
        return Literal(AttributeValue(DataType.BOOLEAN, "true"))
    if len(kids) != 1:
        raise MalformedPolicy("Condition must hold exactly one expression", where)
    expr = _parse_expr(kids[0], where + "/" + _local(kids[0].tag))
    check_condition(expr, where)
    return expr


def _parse_expr(elem: ET.Element, where: str) -> ConditionExpr:
    name = _local(elem.tag)
    if name == "AttributeValue":
        return Literal(_parse_value(elem, where))
    if name in _DESIGNATOR_TAGS:
        return DesignatorBag(_parse_designator(elem, where))
    if name == "Apply":
        _check_attrs(elem, {"FunctionId"}, where)
        function_id = _require(elem, "FunctionId", where).strip()
        lookup(function_id, where)
        paths = _Paths(where)
        args = tuple(_parse_expr(c, paths.child(c)) for c in _children(elem))
        return Apply(function_id, args)
    raise UnsupportedElement(f"unsupported expression element {name}", where)


def _sub(parent: ET.Element, tag: str, **attrs) -> ET.Element:
    return ET.SubElement(parent, tag, {k: v for k, v in attrs.items() if v is not None})


def _value_elem(parent: ET.Element, value: AttributeValue) -> None:
    _sub(parent, "AttributeValue", DataType=value.datatype.uri).text = value.literal


def _designator_elem(parent: ET.Element, d: Designator) -> None:
    _sub(parent, f"{d.category.value}AttributeDesignator",
         AttributeId=d.attribute_id, DataType=d.datatype.uri)


def _target_elem(parent: ET.Element, target: TargetSpec) -> None:
    elem = _sub(parent, "Target")
    for cat in CATEGORIES:
        alternatives = target.alternatives(cat)
        if not alternatives:
            continue
        section = _sub(elem, cat.plural)
        for conj in alternatives:
            alt = _sub(section, cat.value)
            for pred in conj:
                m = _sub(alt, f"{cat.value}Match", MatchId=pred.function_id)
                _value_elem(m, pred.literal)
                _designator_elem(m, pred.designator)


def _expr_elem(parent: ET.Element, expr: ConditionExpr) -> None:
    if isinstance(expr, Literal):
        _value_elem(parent, expr.value)
    elif isinstance(expr, DesignatorBag):
        _designator_elem(parent, expr.designator)
    else:
        node = _sub(parent, "Apply", FunctionId=expr.function_id)
        for arg in expr.args:
            _expr_elem(node, arg)


def _to_text(root: ET.Element) -> str:
    ET.indent(root, space="  ")
    return ET.tostring(root, encoding="unicode") + "\n"


def write_policy(policy: Policy) -> str:
    root = ET.Element("Policy", {
        "xmlns": POLICY_NS,
        "PolicyId": policy.id,
        "RuleCombiningAlgId": policy.rule_combining.urn,
    })
    if policy.description:
        _sub(root, "Description").text = policy.description
    _target_elem(root, policy.target)
    for rule in policy.rules:
        r = _sub(root, "Rule", RuleId=rule.id, Effect=rule.effect.value)
        _target_elem(r, rule.target)
        if rule.condition is not None:
            _expr_elem(_sub(r, "Condition"), rule.condition)
    return _to_text(root)


# -- requests ---------------------------------------------------------------


def parse_request(xml_text: str | bytes) -> Request:
    root = _parse_xml(xml_text)
    if _local(root.tag) != "Request":
        raise UnsupportedElement(f"expected a Request document, found {_local(root.tag)}",
                                 f"/{_local(root.tag)}")
    entries: dict[Category, list] = {c: [] for c in CATEGORIES}
    by_name = {c.value: c for c in CATEGORIES}
    paths = _Paths("/Request")
    for child in _children(root):
        name = _local(child.tag)
        loc = paths.child(child)
        if name not in by_name:
            raise UnsupportedElement(f"unsupported element {name}", loc)
        category = by_name[name]
        allowed = {"SubjectCategory"} if category is Category.SUBJECT else set()
        _check_attrs(child, allowed, loc)
        subject_category = child.get("SubjectCategory")
        if subject_category is not None and subject_category.strip() != ACCESS_SUBJECT:
            # policies only reference the access subject
            continue
        inner = _Paths(loc)
        for attr in _children(child):
            aloc = inner.child(attr)
            if _local(attr.tag) != "Attribute":
                raise UnsupportedElement(f"unsupported element {_local(attr.tag)}", aloc)
            _check_attrs(attr, {"AttributeId", "DataType", "Issuer", "IssueInstant"}, aloc)
            attribute_id = _require(attr, "AttributeId", aloc).strip()
            datatype = _datatype(_require(attr, "DataType", aloc), aloc)
            values = _children(attr)
            if not values:
                raise MalformedPolicy("Attribute without AttributeValue", aloc)
            for v in values:
                if _local(v.tag) != "AttributeValue":
                    raise UnsupportedElement(f"unsupported element {_local(v.tag)}", aloc)
                _check_attrs(v, set(), aloc)
                _check_no_children(v, aloc)
                try:
                    entries[category].append((attribute_id, AttributeValue(datatype, v.text or "")))
                except MalformedPolicy as exc:
                    raise MalformedPolicy(str(exc), aloc) from None
    return Request(*(AttributeBag(entries[c]) for c in CATEGORIES))


def write_request(request: Request) -> str:
    root = ET.Element("Request", {"xmlns": CONTEXT_NS})
    for cat in CATEGORIES:
        elem = _sub(root, cat.value)
        for attribute_id, value in request.bag(cat):
            attr = _sub(elem, "Attribute", AttributeId=attribute_id, DataType=value.datatype.uri)
            _sub(attr, "AttributeValue").text = value.literal
    return _to_text(root)


# -- responses --------------------------------------------------------------


@dataclass(frozen=True)
class ResponseDoc:
    decision: Decision
    status: str = "ok"
    folded: bool = False  # the document said Indeterminate


def write_response(decision: Decision) -> str:
    decision = Decision(decision)
    root = ET.Element("Response", {"xmlns": CONTEXT_NS})
    result = _sub(root, "Result")
    _sub(result, "Decision").text = decision.value
    status = _sub(result, "Status")
    _sub(status, "StatusCode", Value=STATUS_OK)
    return _to_text(root)


def parse_response(xml_text: str | bytes) -> ResponseDoc:
    root = _parse_xml(xml_text)
    if _local(root.tag) != "Response":
        raise UnsupportedElement(f"expected a Response document, found {_local(root.tag)}")
    results = [c for c in _children(root) if _local(c.tag) == "Result"]
    if len(results) != 1:
        raise MalformedPolicy("a Response must hold exactly one Result", "/Response")
    decision = None
    status = "ok"
    folded = False
    for child in _children(results[0]):
        name = _local(child.tag)
        if name == "Decision":
            text = (child.text or "").strip()
            if text == "Indeterminate":
                decision = Decision.NOT_APPLICABLE
                folded = True
            else:
                try:
                    decision = Decision(text)
                except ValueError:
                    raise MalformedPolicy(f"bad decision {text!r}", "/Response/Result") from None
        elif name == "Status":
            for code in child.iter():
                if _local(code.tag) == "StatusCode" and code.get("Value"):
                    status = code.get("Value").rsplit(":", 1)[-1]
                    break
    if decision is None:
        raise MalformedPolicy("Result has no Decision", "/Response/Result")
    return ResponseDoc(decision, status, folded)


# -- literal mining ---------------------------------------------------------

Key = tuple[Category, str]


def _collect(expr: ConditionExpr, literals: list, designators: list) -> None:
    if isinstance(expr, Literal):
        literals.append(expr.value)
    elif isinstance(expr, DesignatorBag):
        designators.append(expr.designator)
    else:
        for arg in expr.args:
            _collect(arg, literals, designators)


def _off_domain(datatype: DataType, values: list[AttributeValue]) -> list[AttributeValue]:
    present = sorted({v.value for v in values}) if values else []
    if datatype in (DataType.STRING, DataType.ANY_URI):
        return [AttributeValue(datatype, NOMATCH)]
    if datatype in (DataType.INTEGER, DataType.DOUBLE):
        step = 1 if datatype is DataType.INTEGER else 1.0
        if not present:
            return [AttributeValue.of(0 * step, datatype)]
        # below the minimum too, so greater-than matches can succeed
        return [AttributeValue.of(present[-1] + step, datatype),
                AttributeValue.of(present[0] - step, datatype)]
    if datatype is DataType.BOOLEAN:
        free = [b for b in (False, True) if b not in present]
        return [AttributeValue.of(free[0], datatype)] if free else []
    if datatype is DataType.DATE:
        if not present:
            return [AttributeValue.of(_dt.date(1970, 1, 1), datatype)]
        return [AttributeValue.of(present[-1] + _dt.timedelta(days=1), datatype)]
    # time
    seconds = {t.hour * 3600 + t.minute * 60 + t.second for t in present}
    candidate = (max(seconds) + 1) % 86400 if seconds else 0
    while candidate in seconds:
        candidate = (candidate + 1) % 86400
    h, rem = divmod(candidate, 3600)
    return [AttributeValue.of(_dt.time(h, rem // 60, rem % 60), datatype)]


def _value_key(v: AttributeValue):
    return (v.datatype.value, v.value)


def mine_attribute_values(policy: Policy) -> dict[Key, tuple[AttributeValue, ...]]:
    """Literal domains per ``(category, attribute_id)`` plus off-domain values.

    Condition literals are attached to every designator of the same datatype
    that appears under the same outermost Apply.
    """
    found: dict[Key, set[AttributeValue]] = defaultdict(set)
    datatypes: dict[Key, set[DataType]] = defaultdict(set)

    def note(designator: Designator, literal: AttributeValue | None = None):
        datatypes[designator.key].add(designator.datatype)
        if literal is not None and literal.datatype is designator.datatype:
            found[designator.key].add(literal)

    for target in [policy.target] + [r.target for r in policy.rules]:
        for cat in CATEGORIES:
            for conj in target.alternatives(cat):
                for pred in conj:
                    note(pred.designator, pred.literal)
    for rule in policy.rules:
        if rule.condition is None:
            continue
        literals: list[AttributeValue] = []
        designators: list[Designator] = []
        _collect(rule.condition, literals, designators)
        for d in designators:
            note(d)
            for lit in literals:
                note(d, lit)

    domains = {}
    for key in sorted(datatypes, key=lambda k: (CATEGORIES.index(k[0]), k[1])):
        values = set(found.get(key, ()))
        for dt in sorted(datatypes[key], key=lambda d: d.value):
            values.update(_off_domain(dt, [v for v in values if v.datatype is dt]))
        domains[key] = tuple(sorted(values, key=_value_key))
    return domains
