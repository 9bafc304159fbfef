"""Structured reports (plain dicts) and their text/JSON renderings."""
from __future__ import annotations

import json
from importlib import resources

from .bias import EffectReport, Mechanism, SingletonReport
from .dag import Dag
from .paths import PathVerdict, Reason
from .scm import EmpiricalVerdict, ErrorSummary, EstimateComparison

SCHEMA_VERSION = 1

MECHANISM_TEXT = {
    Mechanism.SUBSTITUTION: "substitution",
    Mechanism.COMMON_CAUSE: "common cause",
    Mechanism.CONDITIONED_COMMON_OUTCOME: "conditioned common outcome",
    Mechanism.CAUSAL_FORWARD: "causal, exposure proxy -> outcome proxy",
    Mechanism.CAUSAL_REVERSE: "causal, outcome proxy -> exposure proxy",
    Mechanism.DEPENDENT_MEASUREMENT: "dependent measurement",
}

FEATURE_TEXT = {
    "non_null_effect": "non-null effect",
    "common_cause": "common cause",
    "conditioned_common_outcome": "conditioned common outcome",
    "causal_forward": "causal exposure proxy -> outcome proxy",
    "causal_reverse": "causal outcome proxy -> exposure proxy",
    "dependent_measurement": "dependent measurement",
}


def report_schema():
    text = resources.files("mbdag").joinpath("schemas/report.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def graph_summary(dag: Dag) -> dict:
    return {
        "nodes": [{"name": n, "role": dag.roles[n].value} for n in dag.nodes],
        "edges": [[a, b] for a, b in sorted(dag.edges)],
        "conditioned": sorted(dag.conditioned),
        "bindings": [
            {"proxy": b.proxy, "true_var": b.true_var, "systems": list(b.systems)}
            for b in dag.bindings
        ],
    }


def _path_entry(dag, pv: PathVerdict, given, role=None, mechanism=None) -> dict:
    notes = []
    for t in pv.triples:
        if t.reason is Reason.COLLIDER_CONDITIONED:
            notes.append(f"opened by conditioning on {t.middle}")
        elif t.reason is Reason.DESCENDANT_CONDITIONED:
            via = ", ".join(sorted(dag.descendants(t.middle) & given))
            notes.append(f"opened by conditioning on {via} (descendant of collider {t.middle})")
        elif t.reason is Reason.COLLIDER_UNCONDITIONED:
            notes.append(f"blocked at unconditioned collider {t.middle}")
        elif t.reason is Reason.MIDDLE_CONDITIONED:
            notes.append(f"blocked by conditioning on {t.shape.value} node {t.middle}")
    return {
        "nodes": list(pv.path.nodes),
        "arrows": [a.value for a in pv.path.arrows],
        "diagram": str(pv.path),
        "open": pv.open,
        "triples": [
            {"middle": t.middle, "shape": t.shape.value, "open": t.open, "reason": t.reason.value}
            for t in pv.triples
        ],
        "role": role,
        "mechanism": mechanism.value if mechanism else None,
        "notes": notes,
    }


def _verdict_dict(v) -> dict:
    return {
        "outcome_proxy": v.outcome_proxy.value,
        "exposure_proxy": v.exposure_proxy.value,
        "direction": v.direction.value,
        "mode": v.mode.value,
        "paper_conflict": v.paper_conflict,
    }


def _query_dict(q) -> dict:
    return {
        "exposure": q.exposure,
        "outcome": q.outcome,
        "exposure_proxy": q.exposure_proxy,
        "outcome_proxy": q.outcome_proxy,
    }


def analysis_report(source: str, dag: Dag, er: EffectReport) -> dict:
    mechanisms = {pv: m for pv, m in er.redundant_open_paths}
    paths = []
    for pv in er.paths:
        if pv == er.substitution_path:
            entry = _path_entry(dag, pv, dag.conditioned, "substitution",
                                Mechanism.SUBSTITUTION if pv.open else None)
        elif pv in mechanisms:
            entry = _path_entry(dag, pv, dag.conditioned, "redundant", mechanisms[pv])
        elif pv.open:
            entry = _path_entry(dag, pv, dag.conditioned, "effect", Mechanism.SUBSTITUTION)
        else:
            entry = _path_entry(dag, pv, dag.conditioned, "blocked")
        paths.append(entry)
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "analysis",
        "source": source,
        "graph": graph_summary(dag),
        "query": _query_dict(er.query),
        "features": {k: getattr(er.features, k) for k in er.features.__dataclass_fields__},
        "paths": paths,
        "verdict_table": _verdict_dict(er.verdict_table),
        "verdict_derived": _verdict_dict(er.verdict_derived),
        "paper_conflict": er.paper_conflict,
        "substituted_estimate_biased": er.substituted_estimate_biased,
    }


def singleton_report_dict(source: str, dag: Dag, sr: SingletonReport) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "singleton",
        "source": source,
        "graph": graph_summary(dag),
        "proxy": sr.proxy,
        "true_parent": sr.true_parent,
        "non_true_influences": [list(c) for c in sr.non_true_influences],
        "perfect_copy": sr.perfect_copy,
    }


def paths_report(source: str, dag: Dag, x, y, given, verdicts) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "paths",
        "source": source,
        "from": x,
        "to": y,
        "given": sorted(given),
        "paths": [_path_entry(dag, pv, frozenset(given)) for pv in verdicts],
    }


def _error_dict(es: ErrorSummary) -> dict:
    return {
        "proxy": es.proxy,
        "true_var": es.true_var,
        "error_dist": {str(k): es.error_dist[k] for k in (-1, 0, 1)},
        "sensitivity": es.sensitivity,
        "specificity": es.specificity,
    }


def _empirical_dict(ev: EmpiricalVerdict) -> dict:
    return {
        "reading": ev.reading.value,
        "outcome_proxy": ev.outcome_proxy.value,
        "exposure_proxy": ev.exposure_proxy.value,
        "direction": ev.direction.value,
        "outcome_max_deviation": ev.outcome_deviation,
        "exposure_max_deviation": ev.exposure_deviation,
    }


def simulation_report(source, jd, conditions, errors, query=None, empirical=(),
                      derived=None, estimates: EstimateComparison | None = None,
                      dataset=None) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "simulation",
        "source": source,
        "variables": list(jd.variables),
        "conditions": dict(sorted(conditions.items())),
        "pre_conditioning_mass": jd.pre_conditioning_mass,
        "error_summaries": [_error_dict(e) for e in errors],
        "query": _query_dict(query) if query else None,
        "differentiality": [_empirical_dict(e) for e in empirical],
        "verdict_derived": _verdict_dict(derived) if derived else None,
        "estimates": None,
        "dataset": dataset,
    }
    if estimates is not None:
        doc["estimates"] = {
            "risk_ratio_true": estimates.risk_ratio_true,
            "risk_ratio_measured": estimates.risk_ratio_measured,
            "odds_ratio_true": estimates.odds_ratio_true,
            "odds_ratio_measured": estimates.odds_ratio_measured,
            "log_bias_rr": estimates.log_bias_rr,
        }
    return doc


# -- rendering -------------------------------------------------------------

def _path_line(entry) -> str:
    line = f"  {entry['diagram']} [{'OPEN' if entry['open'] else 'BLOCKED'}]"
    tags = []
    if entry.get("role") == "substitution":
        tags.append("substitution")
    elif entry.get("role") == "effect":
        tags.append("effect path (mediated)")
    elif entry.get("mechanism"):
        tags.append(MECHANISM_TEXT[Mechanism(entry["mechanism"])])
    tags.extend(entry["notes"])
    return line + (" " + "; ".join(tags) if tags else "")


def _label(value):
    return value.replace("_", "-")


def _render_verdict(name, v):
    return (f"differentiality ({name}): outcome proxy {_label(v['outcome_proxy'])}, "
            f"exposure proxy {_label(v['exposure_proxy'])}; direction {_label(v['direction'])}")


def _graph_line(g):
    cond = "{" + ", ".join(g["conditioned"]) + "}"
    return f"graph: {len(g['nodes'])} nodes, {len(g['edges'])} edges, conditioned {cond}"


def _render_analysis(r) -> list[str]:
    q = r["query"]
    lines = [
        f"source: {r['source']}",
        _graph_line(r["graph"]),
        f"query: exposure {q['exposure']} (proxy {q['exposure_proxy']}), "
        f"outcome {q['outcome']} (proxy {q['outcome_proxy']})",
    ]
    opened = sum(p["open"] for p in r["paths"])
    lines.append(f"paths {q['exposure_proxy']} ~ {q['outcome_proxy']}: {len(r['paths'])} ({opened} open)")
    lines.extend(_path_line(p) for p in r["paths"])
    feats = [FEATURE_TEXT[k] for k, v in r["features"].items() if v]
    lines.append("features: " + (", ".join(feats) if feats else "none"))
    lines.append(_render_verdict("table", r["verdict_table"]))
    lines.append(_render_verdict("derived", r["verdict_derived"]))
    lines.append("table/derived conflict: " + ("yes" if r["paper_conflict"] else "no"))
    redundant = [p for p in r["paths"] if p["role"] == "redundant"]
    if redundant:
        lines.append(f"substituted estimate: biased by {len(redundant)} redundant open path(s)")
    else:
        lines.append("substituted estimate: no redundant association")
    return lines


def _render_singleton(r) -> list[str]:
    lines = [f"source: {r['source']}", _graph_line(r["graph"]),
             f"proxy: {r['proxy']} (true variable: {r['true_parent'] or 'none'})"]
    if r["non_true_influences"]:
        lines.append("influences other than the true value:")
        lines.extend("  " + " -> ".join(c) for c in r["non_true_influences"])
    else:
        lines.append("influences other than the true value: none")
    lines.append("perfect copy: " + ("yes" if r["perfect_copy"] else "no"))
    return lines


def _render_paths(r) -> list[str]:
    given = "{" + ", ".join(r["given"]) + "}"
    lines = [f"paths {r['from']} ~ {r['to']} given {given}:"]
    lines.extend(_path_line(p) for p in r["paths"])
    opened = sum(p["open"] for p in r["paths"])
    lines.append(f"{len(r['paths'])} paths, {opened} open")
    return lines


def _f(x):
    return f"{x:.6f}"


def _render_simulation(r) -> list[str]:
    cond = ", ".join(f"{k}={v}" for k, v in r["conditions"].items()) or "none"
    lines = [f"source: {r['source']}", f"conditioning: {cond} (mass {_f(r['pre_conditioning_mass'])})"]
    for e in r["error_summaries"]:
        d = e["error_dist"]
        lines.append(
            f"error {e['proxy']} - {e['true_var']}: P(-1)={_f(d['-1'])} P(0)={_f(d['0'])} P(+1)={_f(d['1'])}; "
            f"sensitivity {_f(e['sensitivity'])}, specificity {_f(e['specificity'])}")
    for ev in r["differentiality"]:
        lines.append(
            f"differentiality ({ev['reading'].replace('_', ' ')} reading): "
            f"outcome proxy {_label(ev['outcome_proxy'])} (max deviation {ev['outcome_max_deviation']:.3e}), "
            f"exposure proxy {_label(ev['exposure_proxy'])} (max deviation {ev['exposure_max_deviation']:.3e})")
    if r["verdict_derived"]:
        lines.append(_render_verdict("derived", r["verdict_derived"]))
    est = r["estimates"]
    if est:
        lines.append(f"risk ratio: true {_f(est['risk_ratio_true'])}, measured {_f(est['risk_ratio_measured'])}; "
                     f"log bias {est['log_bias_rr']:+.6f}")
        lines.append(f"odds ratio: true {_f(est['odds_ratio_true'])}, measured {_f(est['odds_ratio_measured'])}")
    if r["dataset"]:
        lines.append(f"dataset: {r['dataset']['rows']} rows written to {r['dataset']['path']} "
                     f"({r['dataset']['raw_draws']} raw draws)")
    return lines


_RENDERERS = {
    "analysis": _render_analysis,
    "singleton": _render_singleton,
    "paths": _render_paths,
    "simulation": _render_simulation,
}


def render_report(report: dict, fmt: str = "text") -> str:
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    return "\n".join(_RENDERERS[report["kind"]](report)) + "\n"
