import itertools

import pytest
from hypothesis import given, settings, strategies as st

from helpers import brute_force_paths, make_rng, random_dag, random_subset, triple_open
from mbdag import Dag, Role, builtin_scenario, d_separated, enumerate_paths, path_status
from mbdag.errors import InvalidPath, SameNode, TooManyPaths, UnknownNode
from mbdag.paths import Arrow, Path, Reason, Shape


def _seqs(paths):
    return [p.nodes for p in paths]


def test_fig2a_single_path():
    dag = builtin_scenario("fig2a").dag
    (path,) = enumerate_paths(dag, "A*", "Y*")
    assert str(path) == "A* <- A -> Y -> Y*"


@pytest.mark.parametrize("scenario, count", [("fig2a", 1), ("fig3b", 2), ("fig4_detection", 4)])
def test_counts_match_brute_force(scenario, count):
    dag = builtin_scenario(scenario).dag
    got = _seqs(enumerate_paths(dag, "A*", "Y*"))
    assert len(got) == count
    assert got == brute_force_paths(dag.nodes, dag.edges, "A*", "Y*")


def test_fig4_paths_listed():
    dag = builtin_scenario("fig4_detection").dag
    assert [str(p) for p in enumerate_paths(dag, "A*", "Y*")] == [
        "A* <- A -> B -> B* -> Y*",
        "A* <- A -> B <- Y -> Y*",
        "A* <- A -> Y -> B -> B* -> Y*",
        "A* <- A -> Y -> Y*",
    ]


def _collider_path(dag):
    return Path.from_nodes(dag, ["A*", "S", "Y*"])


def test_fig3b_conditioned_collider_opens():
    dag = builtin_scenario("fig3b").dag
    pv = path_status(dag, _collider_path(dag))
    assert pv.open
    (t,) = pv.triples
    assert (t.middle, t.shape, t.reason) == ("S", Shape.COLLIDER, Reason.COLLIDER_CONDITIONED)


def test_fig3b_unconditioned_collider_blocks():
    dag = builtin_scenario("fig3b").dag.with_conditioned(())
    pv = path_status(dag, _collider_path(dag))
    assert not pv.open
    assert [t.reason for t in pv.blocking] == [Reason.COLLIDER_UNCONDITIONED]
    assert not path_status(builtin_scenario("fig3b").dag, _collider_path(dag), given=()).open


def test_fig3a_prefix_blocked_at_proxy():
    dag = builtin_scenario("fig3a").dag
    pv = path_status(dag, Path.from_nodes(dag, ["A", "Y", "Y*", "C"]))
    assert not pv.open
    assert [(t.middle, t.shape) for t in pv.blocking] == [("Y*", Shape.COLLIDER)]


def test_descendant_of_collider_opens():
    dag = Dag.build({"A": Role.AUX, "B": Role.AUX, "C": Role.AUX, "D": Role.AUX},
                    [("A", "C"), ("B", "C"), ("C", "D")], conditioned=["D"])
    pv = path_status(dag, Path.from_nodes(dag, ["A", "C", "B"]))
    assert pv.open and pv.triples[0].reason is Reason.DESCENDANT_CONDITIONED


def test_fork_and_chain_shapes():
    dag = builtin_scenario("fig2a").dag
    pv = path_status(dag, Path.from_nodes(dag, ["A*", "A", "Y", "Y*"]), given={"Y"})
    assert [(t.shape, t.open) for t in pv.triples] == [(Shape.FORK, True), (Shape.CHAIN, False)]


def test_two_node_path_always_open():
    dag = builtin_scenario("fig2a").dag
    assert path_status(dag, Path.from_nodes(dag, ["A", "A*"]), given={"A", "A*"}).open


def test_d_separation_examples():
    dag = builtin_scenario("fig2a").dag
    assert d_separated(dag, "A*", "Y*", set()) is False
    assert d_separated(dag, "A*", "Y*", {"A"}) is True
    iso = Dag().add_node("P").add_node("Q")
    assert d_separated(iso, "P", "Q", set()) is True


def test_d_separated_defaults_to_graph_conditioning():
    dag = builtin_scenario("fig3b_null").dag
    assert not d_separated(dag, "A*", "Y*")
    assert d_separated(dag, "A*", "Y*", given=())


def test_errors():
    dag = builtin_scenario("fig2a").dag
    with pytest.raises(SameNode):
        enumerate_paths(dag, "A", "A")
    with pytest.raises(UnknownNode):
        enumerate_paths(dag, "A", "Q")
    with pytest.raises(UnknownNode):
        d_separated(dag, "A", "Y", {"Q"})
    with pytest.raises(InvalidPath):
        path_status(dag, Path(("A", "Y"), (Arrow.BACKWARD,)))
    with pytest.raises(InvalidPath):
        Path.from_nodes(dag, ["A*", "Y*"])
    with pytest.raises(InvalidPath):
        Path(("A", "Y", "A"), (Arrow.FORWARD, Arrow.BACKWARD))


def test_too_many_paths():
    # complete DAG on 9 nodes has far more than 100 paths between two nodes
    names = [f"N{i}" for i in range(9)]
    dag = Dag.build({n: Role.AUX for n in names}, itertools.combinations(names, 2))
    with pytest.raises(TooManyPaths):
        enumerate_paths(dag, "N0", "N8", limit=100)
    assert d_separated(dag, "N0", "N8", set()) is False


def test_path_reversal_round_trip():
    dag = builtin_scenario("fig4_detection").dag
    for p in enumerate_paths(dag, "A*", "Y*"):
        assert p.reversed().reversed() == p
        assert path_status(dag, p).open == path_status(dag, p.reversed()).open


def _agreement_trial(seed):
    rng = make_rng(seed)
    n = int(rng.integers(2, 9))
    dag = random_dag(rng, n, 0.3)
    for x, y in itertools.combinations(dag.nodes, 2):
        z = random_subset(rng, [v for v in dag.nodes if v not in (x, y)])
        paths = enumerate_paths(dag, x, y)
        assert _seqs(paths) == brute_force_paths(dag.nodes, dag.edges, x, y)
        by_paths = not any(path_status(dag, p, z).open for p in paths)
        by_oracle = not any(triple_open(dag.edges, p.nodes, z, dag.descendants) for p in paths)
        assert d_separated(dag, x, y, z) == by_paths == by_oracle
        assert d_separated(dag, y, x, z) == d_separated(dag, x, y, z)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_reachability_agrees_with_paths(seed):
    _agreement_trial(seed)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_adding_edge_never_loses_paths(seed):
    rng = make_rng(seed)
    dag = random_dag(rng, int(rng.integers(3, 8)), 0.3)
    x, y = dag.nodes[0], dag.nodes[-1]
    before = len(enumerate_paths(dag, x, y))
    for a, b in itertools.permutations(dag.nodes, 2):
        if (a, b) in dag.edges or (b, a) in dag.edges or dag.reaches(b, a):
            continue
        assert len(enumerate_paths(dag.add_edge(a, b), x, y)) >= before
