"""Multi-stage attack graphs and chain-rule compromise probabilities.

Nodes are compromise stages (charger, aggregator, SCADA, ...), edges carry
``P(child compromised | parent compromised)``.  A single path is scored with
the chain rule; several paths into the same target are combined with a
noisy-OR, which treats the paths as independent.
"""
import math
import warnings
from collections import deque
from dataclasses import dataclass, field
from types import MappingProxyType

from .errors import (
    CycleDetected,
    DanglingEdge,
    DomainError,
    DuplicateEdge,
    DuplicateNode,
    EmptyPath,
    MissingEdge,
    NotARoot,
    UnknownTarget,
    UnreachableTargetWarning,
    ValidationError,
)


def _check_probability(value, what):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise DomainError(f"{what} must be a number, got {value!r}")
    if not (0.0 <= value <= 1.0):
        raise DomainError(f"{what} must lie in [0, 1], got {value!r}")
    return float(value)


@dataclass(frozen=True)
class AttackNode:
    id: str
    label: str = ""
    prior: float = 0.0

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise ValidationError("node id must be a nonempty string")
        object.__setattr__(self, "prior", _check_probability(self.prior, f"prior of node {self.id!r}"))
        if not self.label:
            object.__setattr__(self, "label", self.id)


@dataclass(frozen=True)
class AttackEdge:
    parent: str
    child: str
    cond_prob: float

    def __post_init__(self):
        name = f"edge {self.parent!r}->{self.child!r}"
        object.__setattr__(self, "cond_prob", _check_probability(self.cond_prob, f"cond_prob of {name}"))


@dataclass(frozen=True)
class AttackGraph:
    """Validated, immutable attack DAG.  Build it with :func:`build_graph`."""

    nodes: tuple
    edges: tuple
    _by_id: MappingProxyType = field(repr=False, compare=False)
    _children: MappingProxyType = field(repr=False, compare=False)
    _edge_prob: MappingProxyType = field(repr=False, compare=False)
    topological_order: tuple = field(repr=False, compare=False)

    def node(self, node_id):
        return self._by_id[node_id]

    def __contains__(self, node_id):
        return node_id in self._by_id

    @property
    def roots(self):
        has_parent = {e.child for e in self.edges}
        return tuple(n.id for n in self.nodes if n.id not in has_parent)

    def children(self, node_id):
        return self._children.get(node_id, ())

    def cond_prob(self, parent, child):
        """Conditional probability on ``parent -> child``, or ``None`` if absent."""
        return self._edge_prob.get((parent, child))


def build_graph(nodes, edges):
    """Validate nodes and edges and return an :class:`AttackGraph`.

    :raises DuplicateNode: two nodes share an id
    :raises DuplicateEdge: the same (parent, child) pair appears twice
    :raises DanglingEdge: an edge endpoint names no node
    :raises CycleDetected: the edges contain a cycle (self-loops included)
    """
    nodes = tuple(nodes)
    edges = tuple(edges)
    if not nodes:
        raise ValidationError("an attack graph needs at least one node")

    by_id = {}
    for node in nodes:
        if node.id in by_id:
            raise DuplicateNode(f"duplicate node id {node.id!r}")
        by_id[node.id] = node

    edge_prob = {}
    children = {}
    indegree = dict.fromkeys(by_id, 0)
    for e in edges:
        for end in (e.parent, e.child):
            if end not in by_id:
                raise DanglingEdge(f"edge {e.parent!r}->{e.child!r} references unknown node {end!r}")
        if e.parent == e.child:
            raise CycleDetected(f"self-loop on node {e.parent!r}")
        key = (e.parent, e.child)
        if key in edge_prob:
            raise DuplicateEdge(f"duplicate edge {e.parent!r}->{e.child!r}")
        edge_prob[key] = e.cond_prob
        children.setdefault(e.parent, []).append(e.child)
        indegree[e.child] += 1

    # Kahn's algorithm; leftovers sit on a cycle
    queue = deque(n.id for n in nodes if indegree[n.id] == 0)
    order = []
    while queue:
        nid = queue.popleft()
        order.append(nid)
        for child in children.get(nid, ()):
            indegree[child] -= 1
            if indegree[child] == 0:
                queue.append(child)
    if len(order) != len(nodes):
        stuck = sorted(nid for nid, d in indegree.items() if d > 0)
        raise CycleDetected(f"cycle among nodes {stuck}")

    return AttackGraph(
        nodes=nodes,
        edges=edges,
        _by_id=MappingProxyType(by_id),
        _children=MappingProxyType({k: tuple(v) for k, v in children.items()}),
        _edge_prob=MappingProxyType(edge_prob),
        topological_order=tuple(order),
    )


def path_probability(graph, path):
    """Chain-rule probability of a root-to-node path.

    Returns ``prior(path[0])`` times every conditional probability along the
    consecutive edges of ``path``.
    """
    path = list(path)
    if not path:
        raise EmptyPath("path must contain at least one node")
    for nid in path:
        if nid not in graph:
            raise UnknownTarget(f"unknown node {nid!r} in path")
    first = path[0]
    if first not in graph.roots:
        raise NotARoot(f"path starts at {first!r}, which has incoming edges")
    p = graph.node(first).prior
    for parent, child in zip(path, path[1:]):
        q = graph.cond_prob(parent, child)
        if q is None:
            raise MissingEdge(f"no edge {parent!r}->{child!r}")
        p *= q
    return p


def enumerate_paths(graph, target):
    """All root-to-``target`` paths, in deterministic DFS order."""
    if target not in graph:
        raise UnknownTarget(f"unknown target {target!r}")
    paths = []

    def walk(nid, trail):
        trail.append(nid)
        if nid == target:
            paths.append(tuple(trail))
        else:
            for child in graph.children(nid):
                walk(child, trail)
        trail.pop()

    for root in graph.roots:
        walk(root, [])
    return paths


def noisy_or(probabilities):
    """``1 - prod(1 - p)``; 0 for an empty input.

    Evaluated as ``-expm1(sum(log1p(-p)))`` with an exactly rounded sum, so
    tiny path probabilities survive and any input order gives the same bits.
    """
    probabilities = list(probabilities)
    if any(p >= 1.0 for p in probabilities):
        return 1.0
    return -math.expm1(math.fsum(math.log1p(-p) for p in probabilities))


def disruption_probability(graph, target):
    """Probability that ``target`` is compromised through any attack path.

    A single path reproduces the chain-rule product exactly.  An unreachable
    target yields 0 and an :class:`UnreachableTargetWarning`.
    """
    paths = enumerate_paths(graph, target)
    if not paths:
        warnings.warn(f"no root reaches {target!r}", UnreachableTargetWarning, stacklevel=2)
        return 0.0
    if len(paths) == 1:
        return path_probability(graph, paths[0])
    return noisy_or(path_probability(graph, p) for p in paths)


DEFAULT_TARGET = "grid_disruption"


def default_av2g_chain():
    """Four-stage charger -> aggregator -> SCADA -> grid disruption chain."""
    nodes = [
        AttackNode("ev_charger", "EV Charger", 0.07),
        AttackNode("aggregator", "Aggregator"),
        AttackNode("scada", "SCADA"),
        AttackNode("grid_disruption", "Grid Disruption"),
    ]
    edges = [
        AttackEdge("ev_charger", "aggregator", 0.04),
        AttackEdge("aggregator", "scada", 0.06),
        AttackEdge("scada", "grid_disruption", 0.08),
    ]
    return build_graph(nodes, edges)
