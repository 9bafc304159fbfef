"""Immutable causal-graph model with node roles and measurement bindings.

Every mutating-looking method (``add_node``, ``add_edge``, ``condition``...)
returns a new :class:`Dag`; the receiver is never changed.
"""
from __future__ import annotations

import enum
import heapq
from collections import deque
from dataclasses import dataclass, field, replace
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping

from .errors import CycleError, DuplicateEdge, DuplicateNode, NotAProxy, UnknownNode


class Role(enum.Enum):
    TRUE = "true"
    MEASURED = "measured"
    SYSTEM = "system"
    KNOWLEDGE = "knowledge"
    SELECTION = "selection"
    AUX = "aux"


@dataclass(frozen=True)
class MeasurementBinding:
    proxy: str
    true_var: str
    systems: tuple[str, ...] = ()


@dataclass(frozen=True)
class ValidationReport:
    errors: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()

    @property
    def ok(self):
        return not self.errors


def _frozen_map(m):
    return MappingProxyType(dict(m))


@dataclass(frozen=True)
class Dag:
    """A directed acyclic graph over named, role-tagged nodes.

    ``measures`` maps each measured proxy to the variable it records; the
    richer :attr:`bindings` view adds the measurement-system parents.
    ``conditioned`` is the default conditioning set used by analyses.
    """

    roles: Mapping[str, Role] = field(default_factory=lambda: _frozen_map({}))
    edges: frozenset = frozenset()
    conditioned: frozenset = frozenset()
    measures: Mapping[str, str] = field(default_factory=lambda: _frozen_map({}))

    def __post_init__(self):
        object.__setattr__(self, "roles", _frozen_map(self.roles))
        object.__setattr__(self, "measures", _frozen_map(self.measures))
        object.__setattr__(self, "edges", frozenset(tuple(e) for e in self.edges))
        object.__setattr__(self, "conditioned", frozenset(self.conditioned))

    @classmethod
    def build(cls, roles, edges=(), conditioned=(), measures=None):
        """Construct through the checked path: every edge goes through add_edge."""
        dag = cls()
        for name, role in roles.items():
            dag = dag.add_node(name, role)
        for src, dst in edges:
            dag = dag.add_edge(src, dst)
        for proxy, true_var in (measures or {}).items():
            dag = dag.bind(proxy, true_var)
        return dag.condition(*conditioned)

    # -- inspection -------------------------------------------------------

    @property
    def nodes(self):
        return sorted(self.roles)

    def __contains__(self, node):
        return node in self.roles

    def __len__(self):
        return len(self.roles)

    def role(self, node) -> Role:
        self._require(node)
        return self.roles[node]

    def _require(self, *nodes):
        for n in nodes:
            if n not in self.roles:
                raise UnknownNode(n)

    @cached_property
    def _parents(self):
        out = {n: set() for n in self.roles}
        for a, b in self.edges:
            out.setdefault(b, set()).add(a)
        return out

    @cached_property
    def _children(self):
        out = {n: set() for n in self.roles}
        for a, b in self.edges:
            out.setdefault(a, set()).add(b)
        return out

    def parents(self, node):
        self._require(node)
        return frozenset(self._parents[node])

    def children(self, node):
        self._require(node)
        return frozenset(self._children[node])

    def neighbors(self, node):
        self._require(node)
        return frozenset(self._parents[node] | self._children[node])

    def descendants(self, node):
        """All nodes reachable by one or more directed edges, excluding ``node``."""
        self._require(node)
        return frozenset(self._reach(node, self._children))

    def ancestors(self, node):
        self._require(node)
        return frozenset(self._reach(node, self._parents))

    @staticmethod
    def _reach(start, adjacency, avoid=frozenset()):
        seen = set()
        queue = deque([start])
        while queue:
            n = queue.popleft()
            for m in adjacency.get(n, ()):
                if m not in seen and m not in avoid:
                    seen.add(m)
                    queue.append(m)
        return seen

    def reaches(self, src, dst, avoid=frozenset()):
        """True if a directed path src -> ... -> dst exists whose interior avoids ``avoid``."""
        self._require(src, dst)
        return dst in self._reach(src, self._children, frozenset(avoid) - {dst})

    def directed_path(self, src, dst):
        """One shortest directed path from src to dst, or None."""
        prev = {src: None}
        queue = deque([src])
        while queue:
            n = queue.popleft()
            if n == dst:
                out = []
                while n is not None:
                    out.append(n)
                    n = prev[n]
                return out[::-1]
            for m in sorted(self._children.get(n, ())):
                if m not in prev:
                    prev[m] = n
                    queue.append(m)
        return None

    def topological_order(self):
        """Kahn peeling with lexicographic tie-breaking, so the order is canonical."""
        indegree = {n: len(self._parents[n]) for n in self.roles}
        ready = [n for n, d in indegree.items() if d == 0]
        heapq.heapify(ready)
        order = []
        while ready:
            n = heapq.heappop(ready)
            order.append(n)
            for c in self._children[n]:
                indegree[c] -= 1
                if indegree[c] == 0:
                    heapq.heappush(ready, c)
        if len(order) != len(self.roles):
            raise CycleError(self._find_cycle() or [])
        return order

    def _find_cycle(self):
        for a, b in sorted(self.edges):
            path = self.directed_path(b, a)
            if path is not None:
                return path + [b]
        return None

    @property
    def bindings(self) -> tuple[MeasurementBinding, ...]:
        out = []
        for proxy in sorted(self.measures):
            systems = tuple(sorted(
                p for p in self._parents.get(proxy, ())
                if self.roles.get(p) is Role.SYSTEM
            ))
            out.append(MeasurementBinding(proxy, self.measures[proxy], systems))
        return tuple(out)

    def binding(self, proxy):
        for b in self.bindings:
            if b.proxy == proxy:
                return b
        return None

    # -- value-returning edits --------------------------------------------

    def add_node(self, node, role=Role.AUX) -> "Dag":
        if node in self.roles:
            raise DuplicateNode(node)
        if not isinstance(node, str) or not node:
            raise ValueError("node names must be non-empty strings")
        roles = dict(self.roles)
        roles[node] = Role(role)
        return replace(self, roles=roles)

    def add_edge(self, src, dst) -> "Dag":
        self._require(src, dst)
        if src == dst:
            raise CycleError([src, src])
        if (src, dst) in self.edges:
            raise DuplicateEdge(src, dst)
        back = self.directed_path(dst, src)
        if back is not None:
            raise CycleError(back + [dst])
        return replace(self, edges=self.edges | {(src, dst)})

    def remove_edge(self, src, dst) -> "Dag":
        if (src, dst) not in self.edges:
            raise KeyError((src, dst))
        return replace(self, edges=self.edges - {(src, dst)})

    def remove_node(self, node) -> "Dag":
        self._require(node)
        roles = {n: r for n, r in self.roles.items() if n != node}
        measures = {p: t for p, t in self.measures.items() if node not in (p, t)}
        return replace(
            self,
            roles=roles,
            edges=frozenset(e for e in self.edges if node not in e),
            conditioned=self.conditioned - {node},
            measures=measures,
        )

    def condition(self, *nodes) -> "Dag":
        """Add nodes to the conditioning set."""
        self._require(*nodes)
        return replace(self, conditioned=self.conditioned | set(nodes))

    def with_conditioned(self, nodes: Iterable[str]) -> "Dag":
        nodes = frozenset(nodes)
        self._require(*nodes)
        return replace(self, conditioned=nodes)

    def bind(self, proxy, true_var) -> "Dag":
        """Record that ``proxy`` is the measured version of ``true_var``."""
        self._require(proxy, true_var)
        if self.roles[proxy] is not Role.MEASURED:
            raise NotAProxy(proxy)
        measures = dict(self.measures)
        measures[proxy] = true_var
        return replace(self, measures=measures)

    # -- checking ---------------------------------------------------------

    def validate(self) -> ValidationReport:
        errors, warnings = [], []
        for a, b in sorted(self.edges):
            for n in (a, b):
                if n not in self.roles:
                    errors.append(f"edge {a} -> {b} uses undeclared node {n}")
            if a == b:
                errors.append(f"self-loop on {a}")
        for n in sorted(self.conditioned - set(self.roles)):
            errors.append(f"conditioned node {n} is not declared")
        if not errors:
            try:
                self.topological_order()
            except CycleError as exc:
                errors.append(str(exc))
        for b in self.bindings:
            if b.proxy not in self.roles or b.true_var not in self.roles:
                errors.append(f"binding {b.proxy} of={b.true_var} names an undeclared node")
                continue
            if self.roles[b.proxy] is not Role.MEASURED:
                errors.append(f"binding target {b.proxy} is not a measured node")
            if self.roles[b.true_var] not in (Role.TRUE, Role.AUX):
                errors.append(f"{b.proxy} measures {b.true_var}, which is neither true nor aux")
            if (b.true_var, b.proxy) not in self.edges:
                errors.append(f"binding {b.proxy} of={b.true_var} lacks the edge {b.true_var} -> {b.proxy}")

        for n in self.nodes:
            role = self.roles[n]
            parents = self._parents.get(n, set())
            children = self._children.get(n, set())
            if role is Role.MEASURED:
                if not parents:
                    warnings.append(f"{n}: proxy measures nothing (no parents)")
                elif not any(self.roles.get(p) in (Role.TRUE, Role.AUX) for p in parents):
                    warnings.append(f"{n}: proxy has no true-variable parent")
            elif role is Role.SYSTEM:
                measured = [c for c in children if self.roles.get(c) is Role.MEASURED]
                if len(measured) > 1:
                    warnings.append(f"{n}: measurement system feeds {len(measured)} proxies")
            elif role is Role.SELECTION and children:
                warnings.append(f"{n}: selection node has outgoing edges")
        return ValidationReport(tuple(errors), tuple(warnings))
