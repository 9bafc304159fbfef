"""Independent oracles and generators shared by the test modules.

Nothing here imports the path engine; the oracles work from raw edge sets.
"""
import itertools

import numpy as np

from mbdag import Dag, Role


def closure_by_relaxation(edges, node):
    """Descendants by repeatedly relaxing every edge until nothing changes."""
    reached = set()
    changed = True
    while changed:
        changed = False
        for a, b in edges:
            if (a == node or a in reached) and b not in reached:
                reached.add(b)
                changed = True
    reached.discard(node)
    return reached


def brute_force_paths(nodes, edges, x, y):
    """Every undirected simple path x..y by trying all ordered interior subsets."""
    adjacent = {frozenset(e) for e in edges}
    others = [n for n in nodes if n not in (x, y)]
    found = []
    for k in range(len(others) + 1):
        for interior in itertools.permutations(others, k):
            seq = (x,) + interior + (y,)
            if all(frozenset(p) in adjacent for p in zip(seq, seq[1:])):
                found.append(seq)
    return sorted(found)


def triple_open(edges, seq, given, descendants):
    """Open/blocked for a node sequence using the textbook triple rules."""
    edges = set(edges)
    for i in range(1, len(seq) - 1):
        a, m, b = seq[i - 1], seq[i], seq[i + 1]
        collider = (a, m) in edges and (b, m) in edges
        if collider:
            if m not in given and not (descendants(m) & set(given)):
                return False
        elif m in given:
            return False
    return True


def directed_chains_into(edges, target):
    """All maximal directed chains ending at target (walk parents to roots)."""
    parents = {}
    for a, b in edges:
        parents.setdefault(b, []).append(a)
    out = []

    def back(chain):
        ps = parents.get(chain[0], [])
        if not ps:
            out.append(chain)
        for p in ps:
            back((p,) + chain)

    back((target,))
    return out


def random_dag(rng, n, p=0.3, roles=None):
    """Random DAG over X0..X{n-1}: edge i->j (i<j) with probability p."""
    names = [f"X{i}" for i in range(n)]
    perm = rng.permutation(n)
    dag = Dag()
    for name in names:
        dag = dag.add_node(name, Role.AUX if roles is None else roles)
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                dag = dag.add_edge(names[perm[i]], names[perm[j]])
    return dag


def random_subset(rng, items, p=0.3):
    return {x for x in items if rng.random() < p}


def make_rng(seed):
    return np.random.default_rng(seed)
