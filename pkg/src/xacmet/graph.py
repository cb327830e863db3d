"""Evaluation graph built on top of the XAC-Tree.

Every edge records the graph-parent condition that licenses it. Integer
tags ``1``..``8`` are the eight structural conditions; the string tags
mark the few edges the literal conditions leave out but evaluation needs:

``"2+"``
    a leaf hops to the right sibling of a more distant ancestor (the
    depth-first successor), e.g. the last action match to the Condition.
``"4+"``
    an Effect/NotApplicable edge from a node that is not the rule's
    rightmost leaf (an earlier alternative of the last section, or an
    empty rule target with no condition).
``"fail"``
    the last alternative of a section gives up: NotApplicable of its rule,
    or ReturnNotApplicable when it sits in the policy target.
``"skip"``
    an empty policy target to ReturnNotApplicable (never feasible, kept so
    the skipped-policy path is a real walk).
``"return-na"``
    RuleAlgorithm to ReturnNotApplicable.
"""

from __future__ import annotations

import enum
from collections.abc import Iterable
from dataclasses import dataclass, replace
from typing import Union

from .errors import MalformedTree
from .model import Effect
from .tree import (
    MATCH_TYPES,
    T,
    XacNode,
    XacTree,
    _dot_id,
    effect_of,
)

Tag = Union[int, str]


class EdgeColor(str, enum.Enum):
    RED = "red"  # dashed
    BLUE = "blue"  # dotted
    PLAIN = "plain"


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    condition: Tag
    color: EdgeColor = EdgeColor.PLAIN


class XacGraph:
    def __init__(self, tree: XacTree, nodes: Iterable[XacNode], edges: Iterable[Edge]):
        self.tree = tree
        self.nodes: tuple[XacNode, ...] = tuple(nodes)
        self.edges: tuple[Edge, ...] = tuple(edges)
        self._by_label = {n.label: n for n in self.nodes}
        self._out: dict[str, list[Edge]] = {n.label: [] for n in self.nodes}
        self._edge = {}
        for e in self.edges:
            self._out[e.source].append(e)
            self._edge[(e.source, e.target)] = e
        self.entry = tree.root
        self.rule_labels = tuple(n.label for n in tree.rules())

    def node(self, label) -> XacNode:
        return self._by_label[str(label)]

    def __contains__(self, label) -> bool:
        return str(label) in self._by_label

    def out_edges(self, label) -> tuple[Edge, ...]:
        return tuple(self._out[str(label)])

    def edge(self, source, target) -> Edge | None:
        return self._edge.get((str(source), str(target)))

    def has_edge(self, source, target) -> bool:
        return (str(source), str(target)) in self._edge

    @property
    def algorithm(self):
        from .tree import algorithm_of
        return algorithm_of(self.node("RuleAlgorithm"))

    @property
    def is_colored(self) -> bool:
        return any(e.color is not EdgeColor.PLAIN for e in self.edges)

    def effect_node(self, rule_label: str) -> XacNode:
        return self.node(f"Effect_{self.node(rule_label).parameter}")

    def not_applicable_node(self, rule_label: str) -> XacNode:
        return self.node(f"NotApplicable_{self.node(rule_label).parameter}")


def forward_nodes(graph: XacGraph, node) -> tuple[XacNode, ...]:
    """Successors of ``node`` (its forward node set), in edge order."""
    return tuple(graph.node(e.target) for e in graph.out_edges(node))


def _enclosing_rule(tree: XacTree, node: XacNode) -> XacNode | None:
    while node is not None and node.node_type is not T.RULE:
        node = tree.parent(node.label)
    return node


def build_graph(tree: XacTree) -> XacGraph:
    tree.validate()
    root = tree.root
    rules = tree.rules()
    policy_target = tree.children(root.label)[0]
    if policy_target.node_type is not T.TARGET:
        raise MalformedTree("the policy's first child must be its Target")

    extra: list[XacNode] = []
    for rule in rules:
        kids = tree.children(rule.label)
        if not kids or kids[0].node_type is not T.TARGET:
            raise MalformedTree(f"{rule.label} does not start with a Target")
        extra.append(XacNode(T.EFFECT, rule.parameter, (("EffectValue", rule.attr("EffectRule")),)))
        extra.append(XacNode(T.NOT_APPLICABLE, rule.parameter))
    algorithm = XacNode(T.RULE_ALGORITHM, None, (("Algorithm", root.attr("RuleCombAlg")),))
    effects = {effect_of(r) for r in rules}
    # a ReturnPermit/ReturnDeny node only exists when some rule can reach it
    returns = {e: XacNode(T(f"Return{e.value}"), None) for e in (Effect.PERMIT, Effect.DENY)
               if e in effects}
    return_na = XacNode(T.RETURN_NOT_APPLICABLE, None)
    extra += [algorithm, *returns.values(), return_na]

    edges: list[Edge] = []

    def link(i: XacNode, j: XacNode, tag: Tag) -> None:
        edges.append(Edge(i.label, j.label, tag))

    def sinks(node: XacNode) -> tuple[XacNode, XacNode] | None:
        rule = _enclosing_rule(tree, node)
        if rule is None:
            return None
        p = rule.parameter
        return (next(n for n in extra if n.label == f"Effect_{p}"),
                next(n for n in extra if n.label == f"NotApplicable_{p}"))

    def success_hop(leaf: XacNode) -> tuple[XacNode, Tag]:
        """Where evaluation continues once ``leaf`` is satisfied."""
        up = tree.parent(leaf.label)
        tag: Tag = 2
        while up is not None and up.node_type is not T.RULE and up.label != root.label:
            nxt = tree.right_sibling(up.label)
            if nxt is not None:
                return nxt, tag
            up = tree.parent(up.label)
            tag = "2+"
        effect, _ = sinks(leaf)
        return effect, (4 if tree.rightmost_leaf(up.label) == leaf else "4+")

    for node in tree.nodes:
        kids = tree.children(node.label)
        if kids:
            link(node, kids[0], 3)
            continue
        rule = _enclosing_rule(tree, node)
        if node.node_type is T.CONDITION:
            effect, na = sinks(node)
            link(node, effect, 4)
            link(node, na, 4)
        elif node.node_type is T.TARGET:
            nxt = tree.right_sibling(node.label)
            if rule is None:
                # empty policy target: first rule, or the policy is skipped
                link(node, nxt, 1)
                link(node, return_na, "skip")
            elif nxt is not None:
                link(node, nxt, 1)
            else:
                effect, na = sinks(node)
                link(node, effect, "4+")
                link(node, na, "4+")
        elif node.node_type in MATCH_TYPES:
            target, tag = success_hop(node)
            nxt = tree.right_sibling(node.label)
            last = nxt is None
            if last:
                if rule is None:
                    failure, ftag = return_na, "fail"
                else:
                    failure = sinks(node)[1]
                    ftag = 4 if tree.rightmost_leaf(rule.label) == node else "fail"
            else:
                failure, ftag = nxt, 1
            link(node, target, tag)
            link(node, failure, ftag)
        else:
            raise MalformedTree(f"unexpected leaf {node.label}")

    for rule in rules:
        effect, na = sinks(tree.children(rule.label)[0])
        link(effect, algorithm, 5)
        link(na, algorithm, 5)
    if Effect.PERMIT in effects:
        link(algorithm, returns[Effect.PERMIT], 6)
    if Effect.DENY in effects:
        link(algorithm, returns[Effect.DENY], 7)
    for rule in rules:
        left = tree.left_sibling(rule.label)
        if left is None or left.node_type is not T.TARGET:
            link(algorithm, rule, 8)
    link(algorithm, return_na, "return-na")

    return XacGraph(tree, list(tree.nodes) + extra, edges)


_FAILURE_TYPES = frozenset({T.NOT_APPLICABLE, T.RETURN_NOT_APPLICABLE})


def color_edges(graph: XacGraph) -> XacGraph:
    """Mark the two out-edges of every match node red (dashed) or blue (dotted).

    Red goes to a node of the same type or to a NotApplicable sink, blue to
    anything else. All other edges stay plain.
    """
    colored = []
    for e in graph.edges:
        b = graph.node(e.source)
        color = EdgeColor.PLAIN
        if b.node_type in MATCH_TYPES and len(graph.out_edges(b.label)) == 2:
            c = graph.node(e.target)
            if c.node_type is b.node_type or c.node_type in _FAILURE_TYPES:
                color = EdgeColor.RED
            else:
                color = EdgeColor.BLUE
        colored.append(replace(e, color=color))
    return XacGraph(graph.tree, graph.nodes, colored)


def literal_conditions(tree: XacTree, graph: XacGraph, i: str, j: str) -> set[int]:
    """Which of the eight graph-parent conditions hold for ``(i, j)`` read literally.

    Independent of :func:`build_graph`; used to audit its edge tags.
    """
    ni, nj = graph.node(i), graph.node(j)
    in_tree = i in tree and j in tree
    held: set[int] = set()
    if in_tree:
        left = tree.left_sibling(j)
        if left is not None and left.label == i and nj.node_type is not T.RULE and tree.is_leaf(i):
            held.add(1)
        parent = tree.parent(i)
        if (tree.is_leaf(i) and parent is not None and left is not None
                and left.label == parent.label and nj.node_type is not T.RULE):
            held.add(2)
        if left is None and tree.parent(j) is not None and tree.parent(j).label == i:
            held.add(3)
    if (i in tree and nj.node_type in (T.EFFECT, T.NOT_APPLICABLE) and tree.is_leaf(i)
            and ni.node_type is not T.TARGET):
        rule = _enclosing_rule(tree, ni)
        if (rule is not None and tree.rightmost_leaf(rule.label).label == i
                and nj.parameter == rule.parameter):
            held.add(4)
    if ni.node_type in (T.EFFECT, T.NOT_APPLICABLE) and nj.node_type is T.RULE_ALGORITHM:
        held.add(5)
    if ni.node_type is T.RULE_ALGORITHM:
        effects = {effect_of(r) for r in tree.rules()}
        if nj.node_type is T.RETURN_PERMIT and Effect.PERMIT in effects:
            held.add(6)
        if nj.node_type is T.RETURN_DENY and Effect.DENY in effects:
            held.add(7)
        if nj.node_type is T.RULE:
            left = tree.left_sibling(j)
            if left is None or left.node_type is not T.TARGET:
                held.add(8)
    return held


_STYLE = {
    EdgeColor.RED: ' color="red", style="dashed"',
    EdgeColor.BLUE: ' color="blue", style="dotted"',
    EdgeColor.PLAIN: "",
}


def export_graph_dot(graph: XacGraph) -> str:
    lines = ["digraph XacGraph {", "  node [shape=box];"]
    for node in graph.nodes:
        shape = ""
        if node.node_type in (T.RETURN_PERMIT, T.RETURN_DENY, T.RETURN_NOT_APPLICABLE):
            shape = ", shape=doubleoctagon"
        elif node.node_type is T.RULE_ALGORITHM:
            shape = ", shape=diamond"
        lines.append(f"  {_dot_id(node.label)} [label={_dot_id(node.display())}{shape}];")
    for e in graph.edges:
        lines.append(f"  {_dot_id(e.source)} -> {_dot_id(e.target)} "
                     f"[label={_dot_id(str(e.condition))}{',' if _STYLE[e.color] else ''}"
                     f"{_STYLE[e.color]}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
