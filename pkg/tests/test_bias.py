import itertools

import pytest

from helpers import directed_chains_into
from mbdag import (
    Dag,
    Direction,
    EffectQuery,
    FeatureSet,
    Mechanism,
    Role,
    analyze_effect,
    builtin_scenario,
    classify_path,
    detect_features,
    differentiality_derived_mode,
    differentiality_table_mode,
    path_status,
    singleton_report,
)
from mbdag.bias import DIFF, NON, Mode
from mbdag.errors import InvalidQuery, NotAProxy, PathNotOpen, WrongEndpoints
from mbdag.paths import Path
from mbdag.scenarios import SCENARIO_NAMES, STANDARD_QUERY

Q = STANDARD_QUERY
EFFECT_SCENARIOS = [n for n in SCENARIO_NAMES if builtin_scenario(n).query is not None]


def _dag(name):
    return builtin_scenario(name).dag


def _pv(dag, nodes):
    return path_status(dag, Path.from_nodes(dag, nodes))


# -- features ---------------------------------------------------------------

def test_features_fig3a():
    assert detect_features(_dag("fig3a"), Q) == FeatureSet(non_null_effect=True, common_cause=True)


def test_features_fig3b():
    assert detect_features(_dag("fig3b"), Q) == FeatureSet(non_null_effect=True, conditioned_common_outcome=True)


def test_features_fig3b_unconditioned():
    f = detect_features(_dag("fig3b").with_conditioned(()), Q)
    assert f == FeatureSet(non_null_effect=True)


def test_features_fig3d():
    assert detect_features(_dag("fig3d"), Q) == FeatureSet(non_null_effect=True, causal_reverse=True)


def test_features_fig3c_null():
    assert detect_features(_dag("fig3c_null"), Q) == FeatureSet(causal_forward=True)


def test_features_dependent_systems():
    assert detect_features(_dag("fig2b"), Q) == FeatureSet(
        non_null_effect=True, common_cause=True, dependent_measurement=True)
    assert detect_features(_dag("fig2a"), Q) == FeatureSet(non_null_effect=True)


def test_features_detection_bias():
    # the fork is A itself, which the feature rule does not count as a common cause
    f = detect_features(_dag("fig4_detection"), Q)
    assert f == FeatureSet(non_null_effect=True)


def test_query_checks():
    dag = _dag("fig2a")
    with pytest.raises(InvalidQuery):
        detect_features(dag, EffectQuery("A", "A", "A*", "Y*"))
    with pytest.raises(NotAProxy):
        detect_features(dag, EffectQuery("A*", "Y*", "A", "Y"))


# -- path classification ------------------------------------------------------

def test_classify_collider_path():
    dag = _dag("fig3b")
    assert classify_path(dag, _pv(dag, ["A*", "S", "Y*"]), Q) is Mechanism.CONDITIONED_COMMON_OUTCOME


def test_classify_reverse_path():
    dag = _dag("fig3d")
    assert classify_path(dag, _pv(dag, ["Y*", "A*"]), Q) is Mechanism.CAUSAL_REVERSE
    assert classify_path(dag, _pv(dag, ["A*", "Y*"]), Q) is Mechanism.CAUSAL_REVERSE


def test_classify_forward_path():
    dag = _dag("fig3c")
    assert classify_path(dag, _pv(dag, ["A*", "Y*"]), Q) is Mechanism.CAUSAL_FORWARD


def test_classify_detection_fork():
    dag = _dag("fig4_detection")
    assert classify_path(dag, _pv(dag, ["A*", "A", "B", "B*", "Y*"]), Q) is Mechanism.COMMON_CAUSE


def test_classify_shared_system():
    dag = _dag("fig2b")
    pv = _pv(dag, ["A*", "M_A*", "D", "M_Y*", "Y*"])
    assert classify_path(dag, pv, Q) is Mechanism.DEPENDENT_MEASUREMENT


def test_classify_substitution():
    dag = _dag("fig2a")
    assert classify_path(dag, _pv(dag, ["A*", "A", "Y", "Y*"]), Q) is Mechanism.SUBSTITUTION


def test_classify_errors():
    dag = _dag("fig3b").with_conditioned(())
    with pytest.raises(PathNotOpen):
        classify_path(dag, _pv(dag, ["A*", "S", "Y*"]), Q)
    dag = _dag("fig2a")
    with pytest.raises(WrongEndpoints):
        classify_path(dag, _pv(dag, ["A", "Y"]), Q)


# -- table mode -----------------------------------------------------------------

FLAGS = ["common_cause", "conditioned_common_outcome", "causal_forward", "causal_reverse",
         "dependent_measurement"]


@pytest.mark.parametrize("bits", list(itertools.product([False, True], repeat=6)))
def test_table_mode_truth_table(bits):
    nonnull, *rest = bits
    f = FeatureSet(nonnull, **dict(zip(FLAGS, rest)))
    v = differentiality_table_mode(f)
    assert v.mode is Mode.TABLE and not v.paper_conflict
    if not nonnull:
        assert (v.outcome_proxy, v.exposure_proxy) == (NON, NON)
        return
    want_out = DIFF if (f.conditioned_common_outcome or f.causal_forward) else NON
    want_exp = DIFF if (f.conditioned_common_outcome or f.causal_reverse) else NON
    assert (v.outcome_proxy, v.exposure_proxy) == (want_out, want_exp)


@pytest.mark.parametrize("features, expected", [
    (FeatureSet(True, common_cause=True), (NON, NON, Direction.NONE)),
    (FeatureSet(True, conditioned_common_outcome=True), (DIFF, DIFF, Direction.BIDIRECTIONAL)),
    (FeatureSet(True, causal_forward=True), (DIFF, NON, Direction.UNIDIRECTIONAL_OUTCOME)),
    (FeatureSet(True, causal_reverse=True), (NON, DIFF, Direction.UNIDIRECTIONAL_EXPOSURE)),
])
def test_table_mode_examples(features, expected):
    v = differentiality_table_mode(features)
    assert (v.outcome_proxy, v.exposure_proxy, v.direction) == expected


# -- derived mode -----------------------------------------------------------------

DERIVED = {
    # scenario: (outcome proxy, exposure proxy, conflict with the rule table)
    "fig3a": (NON, NON, False),
    "fig3b": (DIFF, DIFF, False),
    "fig3c": (DIFF, NON, False),
    "fig3d": (NON, DIFF, False),
    "fig3a_null": (NON, NON, False),
    "fig3b_null": (DIFF, DIFF, True),
    # a direct proxy-to-proxy arrow keeps A -> A* -> Y* open given Y even without an effect
    "fig3c_null": (DIFF, NON, True),
    "fig3d_null": (NON, DIFF, True),
    "fig2a": (NON, NON, False),
    "fig2a_null": (NON, NON, False),
    "fig2b": (NON, NON, False),
    "fig2b_shared": (NON, NON, False),
    # A -> B -> B* -> Y* stays open given Y
    "fig4_detection": (DIFF, NON, True),
}


@pytest.mark.parametrize("name", sorted(DERIVED))
def test_derived_mode(name):
    v = differentiality_derived_mode(_dag(name), Q)
    assert v.mode is Mode.DERIVED
    assert (v.outcome_proxy, v.exposure_proxy, v.paper_conflict) == DERIVED[name]


def test_derived_equals_table_on_non_null_canonical():
    for name in ("fig3a", "fig3b", "fig3c", "fig3d", "fig3a_null"):
        er = analyze_effect(_dag(name), Q)
        assert er.verdict_derived.same_verdict(er.verdict_table)


# -- full analysis ------------------------------------------------------------------

def test_analyze_fig2a():
    er = analyze_effect(_dag("fig2a"), Q)
    assert er.substitution_path is not None and er.substitution_path.open
    assert er.redundant_open_paths == ()
    assert not er.substituted_estimate_biased


def test_analyze_fig3b():
    er = analyze_effect(_dag("fig3b"), Q)
    ((pv, mech),) = er.redundant_open_paths
    assert pv.path.nodes == ("A*", "S", "Y*")
    assert mech is Mechanism.CONDITIONED_COMMON_OUTCOME
    assert er.substituted_estimate_biased


def test_analyze_fig4():
    er = analyze_effect(_dag("fig4_detection"), Q)
    assert len(er.paths) == 4
    (blocked,) = er.blocked_paths
    assert [t.middle for t in blocked.blocking] == ["B"]
    redundant = {pv.path.nodes: m for pv, m in er.redundant_open_paths}
    assert redundant == {
        ("A*", "A", "B", "B*", "Y*"): Mechanism.COMMON_CAUSE,
        ("A*", "A", "Y", "B", "B*", "Y*"): Mechanism.COMMON_CAUSE,
    }
    assert all("B*" in nodes for nodes in redundant)
    assert er.substituted_estimate_biased


@pytest.mark.parametrize("name", EFFECT_SCENARIOS)
def test_report_invariants(name):
    er = analyze_effect(_dag(name), Q)
    assert er.substituted_estimate_biased == bool(er.redundant_open_paths)
    labels = [m for _, m in er.redundant_open_paths]
    assert Mechanism.SUBSTITUTION not in labels
    assert sum(pv is er.substitution_path for pv in er.paths) <= 1
    assert er.paper_conflict == (not er.verdict_derived.same_verdict(er.verdict_table))


def test_mediated_effect_has_one_substitution_label():
    dag = Dag.build(
        {"A": Role.TRUE, "L": Role.TRUE, "Y": Role.TRUE, "A*": Role.MEASURED, "Y*": Role.MEASURED},
        [("A", "A*"), ("A", "L"), ("L", "Y"), ("A", "Y"), ("Y", "Y*")],
    )
    er = analyze_effect(dag, Q)
    assert er.substitution_path.path.nodes == ("A*", "A", "Y", "Y*")
    assert er.redundant_open_paths == ()


# -- singleton measurement ---------------------------------------------------------------

def test_singleton_fig1():
    sr = singleton_report(_dag("fig1"), "A*")
    assert sr.true_parent == "A"
    assert sr.non_true_influences == (("K_A*", "M_A*", "A*"),)
    assert not sr.perfect_copy


def test_singleton_perfect_copy():
    dag = Dag.build({"A": Role.TRUE, "A*": Role.MEASURED}, [("A", "A*")])
    sr = singleton_report(dag, "A*")
    assert sr.perfect_copy and sr.non_true_influences == ()


def test_singleton_fig2a_matches_chain_oracle():
    dag = _dag("fig2a")
    sr = singleton_report(dag, "Y*")
    oracle = sorted(c for c in directed_chains_into(dag.edges, "Y*") if "Y" not in c)
    assert list(sr.non_true_influences) == oracle == [("M_Y*", "Y*")]


def test_singleton_requires_proxy():
    with pytest.raises(NotAProxy):
        singleton_report(_dag("fig2a"), "A")


# -- omitting isolated measurement systems ----------------------------------------------------

def _add_system(dag, proxy, name="M_extra"):
    return dag.add_node(name, Role.SYSTEM).add_edge(name, proxy)


@pytest.mark.parametrize("name", EFFECT_SCENARIOS)
@pytest.mark.parametrize("proxy", ["A*", "Y*"])
def test_exogenous_system_does_not_change_verdicts(name, proxy):
    dag = _dag(name)
    grown = _add_system(dag, proxy)
    for fn in (lambda d: differentiality_table_mode(detect_features(d, Q)),
               lambda d: differentiality_derived_mode(d, Q)):
        assert fn(grown).same_verdict(fn(dag))
    assert fn(grown.remove_node("M_extra")) == fn(dag)


def test_removing_fig2a_systems_keeps_verdicts():
    dag = _dag("fig2a")
    bare = dag.remove_node("M_A*").remove_node("M_Y*")
    assert differentiality_derived_mode(bare, Q) == differentiality_derived_mode(dag, Q)
    assert detect_features(bare, Q) == detect_features(dag, Q)
