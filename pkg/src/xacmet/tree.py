"""Typed, labeled tree mirroring the policy's element containment.

Nodes are numbered by a pre-order walk starting at 1, so the policy root
is ``Policy_1`` and its target ``Target_2``. Match elements are not
materialized; each Subject/Resource/Action/Environment node carries its
conjunction of match predicates as payload.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any

from .errors import MalformedTree
from .model import CATEGORIES, CombiningAlgorithm, Effect, Policy, TargetSpec


class XacNodeType(str, enum.Enum):
    POLICY = "Policy"
    TARGET = "Target"
    RULE = "Rule"
    SUBJECTS = "Subjects"
    SUBJECT = "Subject"
    RESOURCES = "Resources"
    RESOURCE = "Resource"
    ACTIONS = "Actions"
    ACTION = "Action"
    ENVIRONMENTS = "Environments"
    ENVIRONMENT = "Environment"
    CONDITION = "Condition"
    RULE_ALGORITHM = "RuleAlgorithm"
    EFFECT = "Effect"
    NOT_APPLICABLE = "NotApplicable"
    RETURN_PERMIT = "ReturnPermit"
    RETURN_DENY = "ReturnDeny"
    RETURN_NOT_APPLICABLE = "ReturnNotApplicable"


T = XacNodeType

TREE_TYPES = frozenset({
    T.POLICY, T.TARGET, T.RULE, T.SUBJECTS, T.SUBJECT, T.RESOURCES, T.RESOURCE,
    T.ACTIONS, T.ACTION, T.ENVIRONMENTS, T.ENVIRONMENT, T.CONDITION,
})
SECTION_TYPES = frozenset({T.SUBJECTS, T.RESOURCES, T.ACTIONS, T.ENVIRONMENTS})
MATCH_TYPES = frozenset({T.SUBJECT, T.RESOURCE, T.ACTION, T.ENVIRONMENT})
RETURN_TYPES = frozenset({T.RETURN_PERMIT, T.RETURN_DENY, T.RETURN_NOT_APPLICABLE})

# which attribute each node type must carry
_REQUIRED_ATTR = {
    T.POLICY: "RuleCombAlg",
    T.RULE: "EffectRule",
    T.EFFECT: "EffectValue",
    T.RULE_ALGORITHM: "Algorithm",
}


@dataclass(frozen=True)
class XacNode:
    node_type: XacNodeType
    parameter: int | None
    attrs: tuple[tuple[str, str], ...] = ()
    payload: Any = field(default=None, compare=False, repr=False, hash=False)

    @property
    def label(self) -> str:
        if self.parameter is None:
            return self.node_type.value
        return f"{self.node_type.value}_{self.parameter}"

    @property
    def id(self) -> str:
        return self.label

    def attr(self, name: str) -> str | None:
        return dict(self.attrs).get(name)

    def display(self) -> str:
        """``Rule_3 [Deny]`` style rendering."""
        if not self.attrs:
            return self.label
        return f"{self.label} [{', '.join(v for _, v in self.attrs)}]"

    def __str__(self) -> str:
        return self.label


class XacTree:
    """Rooted ordered tree; node identity is the node label."""

    def __init__(self, nodes, children: dict[str, tuple[str, ...]], root: str):
        self.nodes: tuple[XacNode, ...] = tuple(nodes)
        self._by_label = {n.label: n for n in self.nodes}
        self._children = {n.label: tuple(children.get(n.label, ())) for n in self.nodes}
        self._parent: dict[str, str] = {}
        for parent, kids in self._children.items():
            for kid in kids:
                self._parent[kid] = parent
        self.root = self._by_label[root]

    @property
    def edges(self) -> list[tuple[str, str]]:
        return [(p, c) for p in self._children for c in self._children[p]]

    def node(self, label: str) -> XacNode:
        return self._by_label[str(label)]

    def __contains__(self, label) -> bool:
        return str(label) in self._by_label

    def __len__(self) -> int:
        return len(self.nodes)

    def children(self, label) -> tuple[XacNode, ...]:
        return tuple(self._by_label[c] for c in self._children[str(label)])

    def parent(self, label) -> XacNode | None:
        p = self._parent.get(str(label))
        return self._by_label[p] if p is not None else None

    def _sibling(self, label, offset: int) -> XacNode | None:
        parent = self._parent.get(str(label))
        if parent is None:
            return None
        kids = self._children[parent]
        i = kids.index(str(label)) + offset
        return self._by_label[kids[i]] if 0 <= i < len(kids) else None

    def left_sibling(self, label) -> XacNode | None:
        return self._sibling(label, -1)

    def right_sibling(self, label) -> XacNode | None:
        return self._sibling(label, +1)

    def is_leaf(self, label) -> bool:
        return not self._children[str(label)]

    def subtree(self, label) -> list[XacNode]:
        out = [self.node(label)]
        for kid in self._children[str(label)]:
            out.extend(self.subtree(kid))
        return out

    def rightmost_leaf(self, label) -> XacNode:
        node = self.node(label)
        while self._children[node.label]:
            node = self._by_label[self._children[node.label][-1]]
        return node

    def rules(self) -> list[XacNode]:
        return [n for n in self.children(self.root) if n.node_type is T.RULE]

    def validate(self) -> None:
        """Raise MalformedTree unless the structural invariants hold."""
        if self.root.node_type is not T.POLICY:
            raise MalformedTree("root is not a Policy node")
        if len(self.edges) != len(self.nodes) - 1:
            raise MalformedTree("edge count does not match a tree")
        seen = set()
        for node in self.subtree(self.root.label):
            if node.label in seen:
                raise MalformedTree(f"{node.label} reached twice")
            seen.add(node.label)
        if len(seen) != len(self.nodes):
            raise MalformedTree("tree is not connected")
        for node in self.nodes:
            if node.node_type not in TREE_TYPES:
                raise MalformedTree(f"{node.label} has a non-tree type")
            names = {k for k, _ in node.attrs}
            want = _REQUIRED_ATTR.get(node.node_type)
            if names != ({want} if want else set()):
                raise MalformedTree(f"{node.label} carries attributes {sorted(names)}")
        params = [n.parameter for n in self.nodes]
        if sorted(params) != list(range(1, len(params) + 1)):
            raise MalformedTree("parameters are not contiguous from 1")
        if not self.rules():
            raise MalformedTree("policy has no Rule nodes")


def build_tree(policy: Policy) -> XacTree:
    nodes: list[XacNode] = []
    children: dict[str, list[str]] = {}

    def add(parent: XacNode | None, node_type: XacNodeType, attrs=(), payload=None) -> XacNode:
        node = XacNode(node_type, len(nodes) + 1, tuple(attrs), payload)
        nodes.append(node)
        children[node.label] = []
        if parent is not None:
            children[parent.label].append(node.label)
        return node

    def add_target(parent: XacNode, target: TargetSpec) -> None:
        t = add(parent, T.TARGET, payload=target)
        for cat in CATEGORIES:
            alternatives = target.alternatives(cat)
            if not alternatives:
                continue
            section = add(t, T(cat.plural), payload=cat)
            for conj in alternatives:
                add(section, T(cat.value), payload=conj)

    root = add(None, T.POLICY, [("RuleCombAlg", policy.rule_combining.value)], policy)
    add_target(root, policy.target)
    for index, rule in enumerate(policy.rules):
        r = add(root, T.RULE, [("EffectRule", rule.effect.value)], (index, rule))
        add_target(r, rule.target)
        if rule.condition is not None:
            add(r, T.CONDITION, payload=rule.condition)
    return XacTree(nodes, {k: tuple(v) for k, v in children.items()}, root.label)


def _dot_id(label: str) -> str:
    return '"' + label.replace('"', '\\"') + '"'


def export_tree_dot(tree: XacTree) -> str:
    lines = ["digraph XacTree {", "  node [shape=box];"]
    for node in tree.nodes:
        lines.append(f"  {_dot_id(node.label)} [label={_dot_id(node.display())}];")
    for parent, child in tree.edges:
        lines.append(f"  {_dot_id(parent)} -> {_dot_id(child)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def effect_of(node: XacNode) -> Effect:
    return Effect(node.attr("EffectRule") or node.attr("EffectValue"))


def algorithm_of(node: XacNode) -> CombiningAlgorithm:
    return CombiningAlgorithm(node.attr("RuleCombAlg") or node.attr("Algorithm"))
