#!/usr/bin/env python3
""" Instance Disassembler: dependency graphs over goal objects and the ordered sub-goal sequence. """

import logging
import re
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Optional, Tuple

import networkx as nx

from .errors import GoalCycle, RuleError
from .pddl_classes import Atom, canonical

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Edge:
    """ goal atom p(a0, a1, ...) gives a dependency edge args[from_idx] -> args[to_idx] """
    from_idx: int
    to_idx: int


@dataclass(frozen=True)
class DependencyRule:
    """ predicate -> Edge, or None for order-free atoms. `default` covers unlisted binary predicates. """
    edges: Dict[str, Optional[Edge]] = field(default_factory=dict)
    default: Optional[Edge] = Edge(1, 0)

    def __hash__(self):
        return hash((tuple(sorted(self.edges.items(), key=lambda item: item[0])), self.default))


DEFAULT_RULE = DependencyRule()


def classify(atom, rule):
    """ ('edge', from, to) | ('self', node) | ('free',) """
    if atom.predicate in rule.edges:
        edge = rule.edges[atom.predicate]
    elif atom.arity == 1:
        return ('self', atom.args[0])
    elif atom.arity == 2:
        edge = rule.default
    else:
        edge = None

    if edge is None or max(edge.from_idx, edge.to_idx) >= atom.arity:
        return ('free',)
    source = atom.args[edge.from_idx]
    target = atom.args[edge.to_idx]
    if source == target:
        return ('self', source)
    return ('edge', source, target)


@dataclass(frozen=True)
class DADG:
    nodes: FrozenSet[str]
    edges: Tuple[Tuple[str, str, Atom], ...]
    self_labels: Tuple[Tuple[str, Atom], ...] = ()

    @property
    def in_degree(self):
        degree = dict.fromkeys(self.nodes, 0)
        for _, target, _ in self.edges:
            degree[target] += 1
        return degree

    @property
    def labels(self):
        return tuple(label for _, _, label in self.edges) + tuple(label for _, label in self.self_labels)

    def graph(self):
        graph = nx.MultiDiGraph()
        graph.add_nodes_from(sorted(self.nodes))
        for source, target, label in self.edges:
            graph.add_edge(source, target, label=label)
        return graph


@dataclass(frozen=True)
class SubGoalSequence:
    """ `ordered` is the whole sequence; `order_free` is the canonical tail appended after the DADGs """
    ordered: Tuple[Atom, ...]
    order_free: Tuple[Atom, ...] = ()

    def __iter__(self):
        return iter(self.ordered)

    def __len__(self):
        return len(self.ordered)

    def __getitem__(self, index):
        return self.ordered[index]

    def __str__(self):
        return ''.join(['[', ', '.join(format_goal(atom) for atom in self.ordered), ']'])


def format_goal(atom):
    """ on(b,c) style, as the decompose sub-command prints it """
    return ''.join([atom.predicate, '(', ','.join(atom.args), ')'])


def order_free_atoms(g, rule):
    return canonical(atom for atom in g.atoms if classify(atom, rule)[0] == 'free')


def build_dadgs(g, rule=DEFAULT_RULE):
    graph = nx.MultiDiGraph()
    self_labels = []
    for atom in canonical(g.atoms):
        kind = classify(atom, rule)
        if kind[0] == 'edge':
            graph.add_edge(kind[1], kind[2], label=atom)
        elif kind[0] == 'self':
            graph.add_node(kind[1])
            self_labels.append((kind[1], atom))

    dadgs = []
    for component in nx.weakly_connected_components(graph):
        edges = tuple(sorted(
            (source, target, data['label'])
            for source, target, data in graph.subgraph(component).edges(data=True)
        ))
        labels = tuple((node, atom) for node, atom in self_labels if node in component)
        dadgs.append(DADG(frozenset(component), edges, labels))

    dadgs.sort(key=lambda dadg: min(dadg.nodes))
    return dadgs


def topo_order(G):
    """ Repeatedly remove the smallest zero in-degree node, emitting its self-labels then its out-edge labels """
    out_labels = {node: [] for node in G.nodes}
    for source, _, label in G.edges:
        out_labels[source].append(label)
    own_labels = {node: [] for node in G.nodes}
    for node, label in G.self_labels:
        own_labels[node].append(label)

    emitted = []
    seen = set()
    removed = set()
    try:
        for node in nx.lexicographical_topological_sort(G.graph()):
            removed.add(node)
            for label in canonical(own_labels[node]) + canonical(out_labels[node]):
                if label not in seen:
                    seen.add(label)
                    emitted.append(label)
    except nx.NetworkXUnfeasible:
        raise GoalCycle(G.nodes - removed) from None
    return emitted


def decompose(g, rule=DEFAULT_RULE, fallback=False):
    ordered = []
    for dadg in build_dadgs(g, rule):
        try:
            ordered.extend(topo_order(dadg))
        except GoalCycle as cycle:
            if not fallback:
                raise
            log.warning('%s; falling back to goal file order for this component', cycle)
            members = set(dadg.labels)
            ordered.extend(atom for atom in g.order if atom in members)

    order_free = order_free_atoms(g, rule)
    ordered.extend(order_free)
    return SubGoalSequence(tuple(ordered), tuple(order_free))


### Rule files: "predicate -> none | edge <from_idx> <to_idx>", '#' comments

_ARROW = re.compile(r'\s*(?:->|→)\s*')


def load_rules(text, dom=None):
    edges = {}
    default = DEFAULT_RULE.default
    default_seen = False

    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip().lower()
        if not line:
            continue
        parts = _ARROW.split(line)
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise RuleError(line_number, 'expected "predicate -> none | edge <from> <to>"')
        key, value = parts[0].strip(), parts[1].split()

        if value == ['none']:
            edge = None
        elif len(value) == 3 and value[0] == 'edge':
            try:
                edge = Edge(int(value[1]), int(value[2]))
            except ValueError:
                raise RuleError(line_number, 'edge indices must be integers') from None
            if edge.from_idx < 0 or edge.to_idx < 0:
                raise RuleError(line_number, 'edge indices are 0-based and non-negative')
        else:
            raise RuleError(line_number, ''.join(['cannot read "', parts[1], '"']))

        if key == 'default':
            if default_seen:
                raise RuleError(line_number, 'default given twice')
            if edge is not None and max(edge.from_idx, edge.to_idx) > 1:
                raise RuleError(line_number, 'the default rule applies to binary predicates')
            default = edge
            default_seen = True
            continue

        if key in edges:
            raise RuleError(line_number, ''.join(['rule for ', key, ' given twice']))
        if dom is not None:
            decl = dom.predicate(key)
            if decl is None:
                raise RuleError(line_number, ''.join(['undeclared predicate ', key]))
            if edge is not None and max(edge.from_idx, edge.to_idx) >= decl.arity:
                raise RuleError(line_number, ''.join(['index out of range for ', key, '/', str(decl.arity)]))
        edges[key] = edge

    return DependencyRule(edges, default)


def read_rules(path, dom=None):
    with open(path, 'r') as handle:
        return load_rules(handle.read(), dom)
