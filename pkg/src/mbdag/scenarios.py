"""Built-in scenarios: shipped ``.dag`` files plus default binary parameters.

Default parameters (chosen to avoid accidental independences):

* P(A=1) = 0.30; non-null effect P(Y=1|A=1) = 0.40, P(Y=1|A=0) = 0.10;
  null effect P(Y=1) = 0.20.
* Every proxy has sensitivity 0.90 and specificity 0.95 against its true
  variable. Where a measurement system M feeds the proxy, M=0 and M=1 are
  two candidate systems (0.85/0.93 and 0.95/0.97) mixed 50:50, so the
  marginal accuracy is still 0.90/0.95.
* A binary cause C, B* or a causal proxy parent adds 0.05 to P(proxy=1)
  when it equals 1.
* Selection: P(S=1 | A*, Y*) = 0.2 + 0.3 A* + 0.3 Y*, analysis keeps S=1.
"""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .bias import EffectQuery
from .dag import Dag
from .dsl import parse
from .errors import UnknownScenario
from .scm import BinaryScm, Cpt

P_EXPOSURE = 0.30
RISK_EXPOSED, RISK_UNEXPOSED = 0.40, 0.10
RISK_NULL = 0.20
SENSITIVITY, SPECIFICITY = 0.90, 0.95
SYSTEM_ACCURACY = {0: (0.85, 0.93), 1: (0.95, 0.97)}
SHIFT = 0.05


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    dag: Dag
    params: BinaryScm
    narrative: str
    file: str
    query: EffectQuery | None = None
    singleton: str | None = None


STANDARD_QUERY = EffectQuery("A", "Y", "A*", "Y*")


def _accuracy(true_value, sens=SENSITIVITY, spec=SPECIFICITY):
    return sens if true_value else 1.0 - spec


def _proxy_cpt(dag, proxy, true_var, system=None, shifters=()):
    parents = tuple(sorted(dag.parents(proxy)))

    def p1(**bits):
        if system is not None:
            sens, spec = SYSTEM_ACCURACY[bits[system]]
            p = _accuracy(bits[true_var], sens, spec)
        else:
            p = _accuracy(bits[true_var])
        return p + SHIFT * sum(bits[s] for s in shifters)

    return Cpt.from_function(proxy, parents, p1)


def _outcome_cpt(dag):
    if "A" in dag.parents("Y"):
        return Cpt("Y", ("A",), {(0,): RISK_UNEXPOSED, (1,): RISK_EXPOSED})
    return Cpt.root("Y", RISK_NULL)


def _fig1(dag):
    return [
        Cpt.root("A", P_EXPOSURE),
        Cpt.root("K_A*", 0.5),
        Cpt("M_A*", ("K_A*",), {(0,): 0.3, (1,): 0.7}),
        Cpt("S_A*", ("M_A*",), {(0,): 0.2, (1,): 0.8}),
        _proxy_cpt(dag, "A*", "A", system="M_A*"),
    ], {"S_A*": 1}


def _fig2(dag):
    cpts = [Cpt.root("A", P_EXPOSURE), _outcome_cpt(dag)]
    events = {}
    if "D" in dag:
        cpts += [Cpt.root("D", 0.5)]
        cpts += [Cpt(m, ("D",), {(0,): 0.3, (1,): 0.7}) for m in ("M_A*", "M_Y*")]
    elif "M" in dag:
        cpts.append(Cpt.root("M", 0.5))
        events = {"M": 1}
    else:
        cpts += [Cpt.root("M_A*", 0.5), Cpt.root("M_Y*", 0.5)]
    sys_a = "M" if "M" in dag else "M_A*"
    sys_y = "M" if "M" in dag else "M_Y*"
    cpts += [
        _proxy_cpt(dag, "A*", "A", system=sys_a),
        _proxy_cpt(dag, "Y*", "Y", system=sys_y),
    ]
    return cpts, events


def _fig3(dag):
    cpts = [Cpt.root("A", P_EXPOSURE), _outcome_cpt(dag)]
    events = {}
    shift_a = [p for p in sorted(dag.parents("A*")) if p != "A"]
    shift_y = [p for p in sorted(dag.parents("Y*")) if p != "Y"]
    cpts += [
        _proxy_cpt(dag, "A*", "A", shifters=shift_a),
        _proxy_cpt(dag, "Y*", "Y", shifters=shift_y),
    ]
    if "C" in dag:
        cpts.append(Cpt.root("C", 0.5))
    if "S" in dag:
        cpts.append(Cpt.from_function("S", ("A*", "Y*"), lambda **b: 0.2 + 0.3 * b["A*"] + 0.3 * b["Y*"]))
        events = {"S": 1}
    return cpts, events


def _fig4(dag):
    return [
        Cpt.root("A", P_EXPOSURE),
        _outcome_cpt(dag),
        Cpt.from_function("B", ("A", "Y"), lambda A, Y: 0.10 + 0.20 * A + 0.30 * Y),
        _proxy_cpt(dag, "A*", "A"),
        _proxy_cpt(dag, "B*", "B"),
        _proxy_cpt(dag, "Y*", "Y", shifters=["B*"]),
    ], {}


# name -> (file, parameter builder, narrative, uses effect query)
_CATALOG = {
    "fig1": ("fig1", _fig1, "single variable A measured through a selected system", False),
    "fig2a": ("fig2a", _fig2, "independent measurement systems for A and Y", True),
    "fig2a_null": ("fig2a_null", _fig2, "independent measurement systems, null A-Y effect", True),
    "fig2b": ("fig2b", _fig2, "measurement systems dependent through a shared cause D", True),
    "fig2b_shared": ("fig2b_shared", _fig2, "one shared kit M measures both A and Y", True),
    "fig3a": ("fig3a", _fig3, "common cause C of A* and Y*", True),
    "fig3b": ("fig3b", _fig3, "common outcome S of A* and Y*, restricted to S=1", True),
    "fig3c": ("fig3c", _fig3, "A* causally affects Y*", True),
    "fig3d": ("fig3d", _fig3, "Y* causally affects A*", True),
    "fig3a_null": ("fig3a_null", _fig3, "common cause C of A* and Y*, null effect", True),
    "fig3b_null": ("fig3b_null", _fig3, "common outcome S of A* and Y*, S=1, null effect", True),
    "fig3c_null": ("fig3c_null", _fig3, "A* causally affects Y*, null effect", True),
    "fig3d_null": ("fig3d_null", _fig3, "Y* causally affects A*, null effect", True),
    "fig4_detection": ("fig4_detection", _fig4,
                       "detection bias: diagnosed symptom B* raises diagnosis of Y", True),
    "hawthorne": ("fig3c", _fig3,
                  "Hawthorne effect: diagnosed viral disease (A*) lowers reported prescribing (Y*)", True),
    "recall": ("fig3d", _fig3,
               "recall bias: diagnosed malformation (Y*) shifts reported exposure (A*)", True),
}

SCENARIO_NAMES = tuple(_CATALOG)


def scenario_text(file_stem: str) -> str:
    return resources.files("mbdag").joinpath(f"scenarios/{file_stem}.dag").read_text(encoding="utf-8")


def builtin_scenario(name: str) -> ScenarioSpec:
    if name not in _CATALOG:
        raise UnknownScenario(name, SCENARIO_NAMES)
    stem, builder, narrative, effect = _CATALOG[name]
    dag = parse(scenario_text(stem))
    cpts, events = builder(dag)
    params = BinaryScm(dag, {c.node: c for c in cpts}, events)
    return ScenarioSpec(
        name=name,
        dag=dag,
        params=params,
        narrative=narrative,
        file=f"{stem}.dag",
        query=STANDARD_QUERY if effect else None,
        singleton=None if effect else "A*",
    )
