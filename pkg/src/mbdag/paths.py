"""Undirected simple-path enumeration and d-separation.

Two independent routes answer "are x and y d-separated given Z":
:func:`enumerate_paths` + :func:`path_status` (explicit triple rules), and
:func:`d_separated` (reachability, never enumerates). Tests check they agree.
"""
from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass

from .dag import Dag
from .errors import InvalidPath, SameNode, TooManyPaths

PATH_LIMIT = 10_000


class Arrow(enum.Enum):
    FORWARD = "forward"    # nodes[i] -> nodes[i+1]
    BACKWARD = "backward"  # nodes[i] <- nodes[i+1]


class Shape(enum.Enum):
    CHAIN = "chain"
    FORK = "fork"
    COLLIDER = "collider"


class Reason(enum.Enum):
    MIDDLE_CONDITIONED = "middle_conditioned"
    MIDDLE_UNCONDITIONED = "middle_unconditioned"
    COLLIDER_CONDITIONED = "collider_conditioned"
    DESCENDANT_CONDITIONED = "descendant_conditioned"
    COLLIDER_UNCONDITIONED = "collider_unconditioned"


@dataclass(frozen=True)
class Path:
    nodes: tuple[str, ...]
    arrows: tuple[Arrow, ...]

    def __post_init__(self):
        if len(self.nodes) < 2:
            raise InvalidPath("a path needs at least two nodes")
        if len(self.arrows) != len(self.nodes) - 1:
            raise InvalidPath("need exactly one arrow per consecutive node pair")
        if len(set(self.nodes)) != len(self.nodes):
            raise InvalidPath("path revisits a node: " + ", ".join(self.nodes))

    @classmethod
    def from_nodes(cls, dag: Dag, nodes):
        """Infer arrow marks from the dag's edges."""
        nodes = tuple(nodes)
        arrows = []
        for a, b in zip(nodes, nodes[1:]):
            if (a, b) in dag.edges:
                arrows.append(Arrow.FORWARD)
            elif (b, a) in dag.edges:
                arrows.append(Arrow.BACKWARD)
            else:
                raise InvalidPath(f"{a} and {b} are not adjacent")
        return cls(nodes, tuple(arrows))

    def reversed(self) -> "Path":
        flip = {Arrow.FORWARD: Arrow.BACKWARD, Arrow.BACKWARD: Arrow.FORWARD}
        return Path(self.nodes[::-1], tuple(flip[a] for a in reversed(self.arrows)))

    @property
    def interior(self):
        return self.nodes[1:-1]

    def __str__(self):
        parts = [self.nodes[0]]
        for arrow, node in zip(self.arrows, self.nodes[1:]):
            parts.append("->" if arrow is Arrow.FORWARD else "<-")
            parts.append(node)
        return " ".join(parts)


@dataclass(frozen=True)
class TripleVerdict:
    middle: str
    shape: Shape
    open: bool
    reason: Reason


@dataclass(frozen=True)
class PathVerdict:
    path: Path
    triples: tuple[TripleVerdict, ...]
    open: bool

    @property
    def blocking(self):
        return [t for t in self.triples if not t.open]


def enumerate_paths(dag: Dag, x: str, y: str, limit: int = PATH_LIMIT) -> list[Path]:
    """All simple paths between x and y ignoring edge direction, sorted by node sequence."""
    dag._require(x, y)
    if x == y:
        raise SameNode(x)
    adjacency = {n: sorted(dag.neighbors(n)) for n in dag.nodes}
    found = []
    stack = [x]
    on_path = {x}

    def walk(node):
        for nxt in adjacency[node]:
            if nxt in on_path:
                continue
            if nxt == y:
                found.append(tuple(stack) + (y,))
                if len(found) > limit:
                    raise TooManyPaths(x, y, limit)
                continue
            stack.append(nxt)
            on_path.add(nxt)
            walk(nxt)
            stack.pop()
            on_path.discard(nxt)

    walk(x)
    return [Path.from_nodes(dag, p) for p in sorted(found)]


def _check_path(dag: Dag, path: Path):
    dag._require(*path.nodes)
    for (a, b), arrow in zip(zip(path.nodes, path.nodes[1:]), path.arrows):
        edge = (a, b) if arrow is Arrow.FORWARD else (b, a)
        if edge not in dag.edges:
            raise InvalidPath(f"no edge {edge[0]} -> {edge[1]} for arrow {arrow.value} in {path}")


def path_status(dag: Dag, path: Path, given=None) -> PathVerdict:
    """Adjudicate each interior triple; ``given`` overrides ``dag.conditioned``."""
    _check_path(dag, path)
    z = dag.conditioned if given is None else frozenset(given)
    triples = []
    for i, middle in enumerate(path.interior, start=1):
        into_left = path.arrows[i - 1] is Arrow.FORWARD    # prev -> middle
        into_right = path.arrows[i] is Arrow.BACKWARD      # middle <- next
        if into_left and into_right:
            if middle in z:
                tv = TripleVerdict(middle, Shape.COLLIDER, True, Reason.COLLIDER_CONDITIONED)
            elif dag.descendants(middle) & z:
                tv = TripleVerdict(middle, Shape.COLLIDER, True, Reason.DESCENDANT_CONDITIONED)
            else:
                tv = TripleVerdict(middle, Shape.COLLIDER, False, Reason.COLLIDER_UNCONDITIONED)
        else:
            shape = Shape.FORK if not into_left and not into_right else Shape.CHAIN
            if middle in z:
                tv = TripleVerdict(middle, shape, False, Reason.MIDDLE_CONDITIONED)
            else:
                tv = TripleVerdict(middle, shape, True, Reason.MIDDLE_UNCONDITIONED)
        triples.append(tv)
    return PathVerdict(path, tuple(triples), all(t.open for t in triples))


def d_separated(dag: Dag, x: str, y: str, given=None) -> bool:
    """Reachability ("Bayes-ball") d-separation test.

    ``given`` defaults to ``dag.conditioned``. The endpoints themselves are
    dropped from the conditioning set, matching the path view in which only
    interior nodes of a path are adjudicated.
    """
    dag._require(x, y)
    if x == y:
        raise SameNode(x)
    z = (dag.conditioned if given is None else frozenset(given)) - {x, y}
    dag._require(*z)

    # Nodes with a conditioned descendant-or-self activate colliders.
    active = set(z)
    for n in z:
        active |= dag.ancestors(n)

    visited = set()
    queue = deque([(x, "up")])
    while queue:
        node, direction = queue.popleft()
        if (node, direction) in visited:
            continue
        visited.add((node, direction))
        if node == y:
            return False
        if direction == "up":
            # arrived from a child (or the start): node is not a collider here
            if node in z:
                continue
            for p in dag.parents(node):
                queue.append((p, "up"))
            for c in dag.children(node):
                queue.append((c, "down"))
        else:
            # arrived from a parent
            if node not in z:
                for c in dag.children(node):
                    queue.append((c, "down"))
            if node in active:
                for p in dag.parents(node):
                    queue.append((p, "up"))
    return True
