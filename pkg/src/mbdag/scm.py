"""Binary structural models over a :class:`~mbdag.dag.Dag`, evaluated by exact enumeration.

Every node is a 0/1 variable with a conditional probability table. The joint
is built as a dense ``(2,)*n`` array, so models are capped at 20 nodes.
Event probabilities are summed with :func:`math.fsum`, which makes them
independent of summation order: two events whose nonzero cells coincide get
bit-identical probabilities.
"""
from __future__ import annotations

import csv
import enum
import io
import itertools
import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Mapping

import jsonschema
import numpy as np

from .bias import DIFF, NON, Differentiality, EffectQuery, direction_of
from .dag import Dag, MeasurementBinding
from .errors import (
    DegenerateTable,
    EmptyStratum,
    ParamsError,
    TooManyNodes,
    UnknownNode,
    ZeroMassCondition,
)

MAX_NODES = 20
INDEPENDENCE_TOL = 1e-9


class Reading(enum.Enum):
    TRUE_VALUE = "true_value"
    MEASURED_VALUE = "measured_value"


def _bits(k):
    return list(itertools.product((0, 1), repeat=k))


@dataclass(frozen=True)
class Cpt:
    """P(node=1 | parents), keyed by the parents' bit tuple in ``parents`` order."""

    node: str
    parents: tuple[str, ...]
    prob_one: Mapping[tuple[int, ...], float]

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(self.parents))
        table = {tuple(int(b) for b in k): float(v) for k, v in dict(self.prob_one).items()}
        object.__setattr__(self, "prob_one", table)
        expected = set(_bits(len(self.parents)))
        if set(table) != expected:
            raise ParamsError(f"CPT for {self.node} needs exactly {len(expected)} rows, one per parent assignment")
        for k, v in table.items():
            if not (0.0 <= v <= 1.0) or math.isnan(v):
                raise ParamsError(f"CPT for {self.node} row {k}: probability {v} outside [0, 1]")

    @classmethod
    def root(cls, node, p):
        return cls(node, (), {(): p})

    @classmethod
    def from_function(cls, node, parents, fn):
        """Build from ``fn(**{parent: bit})`` returning P(node=1)."""
        parents = tuple(parents)
        return cls(node, parents, {bits: fn(**dict(zip(parents, bits))) for bits in _bits(len(parents))})

    def as_array(self):
        """P(node=1) as an array with one length-2 axis per parent."""
        arr = np.empty((2,) * len(self.parents))
        for bits, p in self.prob_one.items():
            arr[bits] = p
        return arr


@dataclass(frozen=True)
class BinaryScm:
    dag: Dag
    cpts: Mapping[str, Cpt]
    condition_events: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        cpts = dict(self.cpts)
        events = {k: int(v) for k, v in dict(self.condition_events).items()}
        object.__setattr__(self, "cpts", cpts)
        object.__setattr__(self, "condition_events", events)
        if set(cpts) != set(self.dag.roles):
            missing = sorted(set(self.dag.roles) - set(cpts))
            extra = sorted(set(cpts) - set(self.dag.roles))
            raise ParamsError(f"CPTs must cover exactly the graph nodes (missing {missing}, extra {extra})")
        for n, cpt in cpts.items():
            if cpt.node != n:
                raise ParamsError(f"CPT stored under {n} describes {cpt.node}")
            if set(cpt.parents) != set(self.dag.parents(n)) or len(cpt.parents) != len(set(cpt.parents)):
                raise ParamsError(
                    f"CPT parents of {n} {list(cpt.parents)} differ from graph parents {sorted(self.dag.parents(n))}")
        if set(events) != set(self.dag.conditioned):
            raise ParamsError(
                f"conditioning events {sorted(events)} must match conditioned nodes {sorted(self.dag.conditioned)}")
        for n, v in events.items():
            if v not in (0, 1):
                raise ParamsError(f"conditioning value for {n} must be 0 or 1")

    def unconditioned(self) -> "BinaryScm":
        return BinaryScm(self.dag.with_conditioned(()), self.cpts, {})

    def with_cpt(self, cpt: Cpt) -> "BinaryScm":
        cpts = dict(self.cpts)
        cpts[cpt.node] = cpt
        return replace(self, cpts=cpts)

    def with_accuracy(self, proxy, true_var, sensitivity, specificity) -> "BinaryScm":
        """Replace the proxy's CPT so that it has the given accuracy against ``true_var``,
        whatever its other parents."""
        old = self.cpts[proxy]
        if true_var not in old.parents:
            raise ParamsError(f"{true_var} is not a parent of {proxy}")
        i = old.parents.index(true_var)
        table = {bits: (sensitivity if bits[i] else 1.0 - specificity) for bits in old.prob_one}
        return self.with_cpt(Cpt(proxy, old.parents, table))


@dataclass(frozen=True)
class JointDistribution:
    variables: tuple[str, ...]
    probs: np.ndarray
    pre_conditioning_mass: float

    def _axis(self, v):
        try:
            return self.variables.index(v)
        except ValueError:
            raise UnknownNode(v) from None

    def prob(self, event: Mapping[str, int]) -> float:
        index = [slice(None)] * len(self.variables)
        for v, val in event.items():
            index[self._axis(v)] = int(val)
        sub = self.probs[tuple(index)]
        return math.fsum(np.ravel(sub).tolist()) if np.ndim(sub) else float(sub)

    def conditional(self, target: Mapping[str, int], given: Mapping[str, int]) -> float:
        denom = self.prob(given)
        if denom <= 0.0:
            raise EmptyStratum(f"stratum {dict(given)} has zero probability")
        return self.prob({**given, **target}) / denom

    def assignments(self):
        """Mapping from full bit tuples (``variables`` order) to probability."""
        return {bits: float(self.probs[bits]) for bits in _bits(len(self.variables))}

    @property
    def total(self):
        return math.fsum(self.probs.ravel().tolist())


def exact_joint(scm: BinaryScm) -> JointDistribution:
    dag = scm.dag
    order = tuple(dag.topological_order())
    n = len(order)
    if n > MAX_NODES:
        raise TooManyNodes(f"{n} nodes exceed the exact-enumeration cap of {MAX_NODES}")
    axis = {v: i for i, v in enumerate(order)}
    joint = np.ones((2,) * n)
    for v in order:
        cpt = scm.cpts[v]
        p1 = cpt.as_array()
        factor = np.stack([1.0 - p1, p1], axis=-1)  # axes: parents..., v
        src_axes = [axis[p] for p in cpt.parents] + [axis[v]]
        perm = np.argsort(src_axes)
        factor = np.transpose(factor, perm)
        shape = [1] * n
        for a in src_axes:
            shape[a] = 2
        joint = joint * factor.reshape(shape)

    if scm.condition_events:
        mask = np.zeros((2,) * n, dtype=bool)
        index = [slice(None)] * n
        for v, val in scm.condition_events.items():
            index[axis[v]] = val
        mask[tuple(index)] = True
        mass = math.fsum(joint[mask].tolist())
        if mass <= 0.0:
            raise ZeroMassCondition(f"conditioning event {scm.condition_events} has zero probability")
        joint = np.where(mask, joint, 0.0) / mass
    else:
        mass = math.fsum(joint.ravel().tolist())
    joint.setflags(write=False)
    return JointDistribution(order, joint, mass)


# -- derived statistics ----------------------------------------------------

@dataclass(frozen=True)
class MisclassificationTable:
    """P(proxy=1 | true [, stratifier]); keys are (true,) or (true, stratifier)."""

    proxy: str
    true_var: str
    stratifier: str | None
    prob_one: Mapping[tuple[int, ...], float]

    @property
    def sensitivity(self):
        return self._unstratified()[(1,)]

    @property
    def specificity(self):
        return 1.0 - self._unstratified()[(0,)]

    def _unstratified(self):
        if self.stratifier is not None:
            raise ValueError("sensitivity/specificity need an unstratified table")
        return self.prob_one


def misclassification_matrix(jd: JointDistribution, proxy, true_var, stratifier=None) -> MisclassificationTable:
    table = {}
    for t in (0, 1):
        strata = (None,) if stratifier is None else (0, 1)
        for s in strata:
            given = {true_var: t} if s is None else {true_var: t, stratifier: s}
            key = (t,) if s is None else (t, s)
            table[key] = jd.conditional({proxy: 1}, given)
    return MisclassificationTable(proxy, true_var, stratifier, table)


@dataclass(frozen=True)
class EmpiricalVerdict:
    outcome_proxy: Differentiality
    exposure_proxy: Differentiality
    outcome_deviation: float
    exposure_deviation: float
    reading: Reading

    @property
    def max_deviation(self):
        return max(self.outcome_deviation, self.exposure_deviation)

    @property
    def direction(self):
        return direction_of(self.outcome_proxy, self.exposure_proxy)


def _stratum_spread(jd, proxy, own_true, other):
    """max over own_true of the spread of P(proxy=1 | own_true, other) across other's values."""
    table = misclassification_matrix(jd, proxy, own_true, other).prob_one
    return max(abs(table[(t, 1)] - table[(t, 0)]) for t in (0, 1))


def differentiality_empirical(scm: BinaryScm, q: EffectQuery, reading=Reading.TRUE_VALUE,
                              jd: JointDistribution | None = None) -> EmpiricalVerdict:
    """Numerical counterpart of the graph-derived verdict.

    TRUE_VALUE compares P(Y*=1 | Y, A) across A (and P(A*=1 | A, Y) across Y);
    MEASURED_VALUE stratifies on the other proxy instead of the other true variable.
    """
    reading = Reading(reading)
    jd = exact_joint(scm) if jd is None else jd
    if reading is Reading.TRUE_VALUE:
        out_dev = _stratum_spread(jd, q.outcome_proxy, q.outcome, q.exposure)
        exp_dev = _stratum_spread(jd, q.exposure_proxy, q.exposure, q.outcome)
    else:
        out_dev = _stratum_spread(jd, q.outcome_proxy, q.outcome, q.exposure_proxy)
        exp_dev = _stratum_spread(jd, q.exposure_proxy, q.exposure, q.outcome_proxy)
    return EmpiricalVerdict(
        DIFF if out_dev > INDEPENDENCE_TOL else NON,
        DIFF if exp_dev > INDEPENDENCE_TOL else NON,
        out_dev,
        exp_dev,
        reading,
    )


@dataclass(frozen=True)
class EstimateComparison:
    risk_ratio_true: float
    risk_ratio_measured: float
    odds_ratio_true: float
    odds_ratio_measured: float

    @property
    def log_bias_rr(self):
        return math.log(self.risk_ratio_measured) - math.log(self.risk_ratio_true)


def _two_by_two(jd, x, y):
    cells = {(a, b): jd.prob({x: a, y: b}) for a in (0, 1) for b in (0, 1)}
    if any(v <= 0.0 for v in cells.values()):
        raise DegenerateTable(f"{x} x {y} table has an empty cell: {cells}")
    risk1 = cells[1, 1] / (cells[1, 1] + cells[1, 0])
    risk0 = cells[0, 1] / (cells[0, 1] + cells[0, 0])
    odds = (cells[1, 1] * cells[0, 0]) / (cells[1, 0] * cells[0, 1])
    return risk1 / risk0, odds


def substitution_estimates(jd: JointDistribution, q: EffectQuery) -> EstimateComparison:
    rr_true, or_true = _two_by_two(jd, q.exposure, q.outcome)
    rr_meas, or_meas = _two_by_two(jd, q.exposure_proxy, q.outcome_proxy)
    return EstimateComparison(rr_true, rr_meas, or_true, or_meas)


@dataclass(frozen=True)
class ErrorSummary:
    """Distribution of the measurement error proxy - true over {-1, 0, +1}."""

    proxy: str
    true_var: str
    error_dist: Mapping[int, float]
    sensitivity: float
    specificity: float


def error_summary(jd: JointDistribution, binding: MeasurementBinding) -> ErrorSummary:
    proxy, true_var = binding.proxy, binding.true_var
    under = jd.prob({proxy: 0, true_var: 1})
    over = jd.prob({proxy: 1, true_var: 0})
    exact = math.fsum([jd.prob({proxy: 0, true_var: 0}), jd.prob({proxy: 1, true_var: 1})])
    return ErrorSummary(
        proxy,
        true_var,
        {-1: under, 0: exact, 1: over},
        jd.conditional({proxy: 1}, {true_var: 1}),
        jd.conditional({proxy: 0}, {true_var: 0}),
    )


def ci_deviation(jd: JointDistribution, x, y, given=()) -> float:
    """Largest |P(x,y|z) - P(x|z)P(y|z)| over cells and positive-mass strata z."""
    given = sorted(set(given) - {x, y})
    worst = 0.0
    for zbits in _bits(len(given)):
        z = dict(zip(given, zbits))
        pz = jd.prob(z)
        if pz <= 0.0:
            continue
        for a in (0, 1):
            pa = jd.prob({**z, x: a}) / pz
            for b in (0, 1):
                pb = jd.prob({**z, y: b}) / pz
                pab = jd.prob({**z, x: a, y: b}) / pz
                worst = max(worst, abs(pab - pa * pb))
    return worst


# -- sampling --------------------------------------------------------------

@dataclass(frozen=True)
class Dataset:
    columns: tuple[str, ...]
    rows: np.ndarray
    raw_draws: int

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        writer.writerows(self.rows.tolist())
        return buf.getvalue()


SAMPLE_BATCH = 4096
MAX_RAW_DRAWS = 50_000_000


def sample(scm: BinaryScm, n: int, seed: int) -> Dataset:
    """Ancestral sampling with rejection of rows that violate the conditioning events."""
    if n < 1:
        raise ValueError("n must be at least 1")
    order = tuple(scm.dag.topological_order())
    if scm.condition_events and len(order) <= MAX_NODES:
        exact_joint(scm)  # raises ZeroMassCondition up front
    col = {v: i for i, v in enumerate(order)}
    tables = [(col[v], [col[p] for p in scm.cpts[v].parents], scm.cpts[v].as_array().ravel())
              for v in order]
    rng = np.random.Generator(np.random.PCG64(seed))
    kept, total_kept, raw = [], 0, 0
    while total_kept < n:
        if raw >= MAX_RAW_DRAWS:
            raise ZeroMassCondition(f"fewer than {n} accepted rows after {raw} draws")
        u = rng.random((SAMPLE_BATCH, len(order)))
        x = np.zeros((SAMPLE_BATCH, len(order)), dtype=np.uint8)
        for vi, parent_cols, p1 in tables:
            idx = np.zeros(SAMPLE_BATCH, dtype=np.int64)
            for pc in parent_cols:
                idx = idx * 2 + x[:, pc]
            x[:, vi] = u[:, vi] < p1[idx]
        ok = np.ones(SAMPLE_BATCH, dtype=bool)
        for v, val in scm.condition_events.items():
            ok &= x[:, col[v]] == val
        accepted = np.flatnonzero(ok)
        need = n - total_kept
        if len(accepted) >= need:
            raw += int(accepted[need - 1]) + 1
            kept.append(x[accepted[:need]])
            total_kept = n
        else:
            raw += SAMPLE_BATCH
            kept.append(x[accepted])
            total_kept += len(accepted)
    return Dataset(order, np.concatenate(kept), raw)


def random_scm(dag: Dag, rng: np.random.Generator, low=0.05, high=0.95, condition_events=None) -> BinaryScm:
    cpts = {}
    for v in dag.topological_order():
        parents = tuple(sorted(dag.parents(v)))
        values = rng.uniform(low, high, size=2 ** len(parents))
        cpts[v] = Cpt(v, parents, dict(zip(_bits(len(parents)), values.tolist())))
    if condition_events is None:
        condition_events = {n: 1 for n in dag.conditioned}
    return BinaryScm(dag, cpts, condition_events)


# -- parameter files -------------------------------------------------------

def params_schema():
    text = resources.files("mbdag").joinpath("schemas/params.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def params_to_dict(scm: BinaryScm) -> dict:
    cpts = {}
    for v in scm.dag.topological_order():
        cpt = scm.cpts[v]
        cpts[v] = {
            "parents": list(cpt.parents),
            "p1": {"".join(map(str, bits)): cpt.prob_one[bits] for bits in _bits(len(cpt.parents))},
        }
    return {"schema_version": 1, "cpts": cpts, "conditions": dict(sorted(scm.condition_events.items()))}


def params_from_dict(dag: Dag, doc: dict) -> BinaryScm:
    try:
        jsonschema.validate(doc, params_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ParamsError(f"parameter file invalid at {where}: {exc.message}") from None
    cpts = {}
    for node, entry in doc["cpts"].items():
        parents = tuple(entry["parents"])
        table = {}
        for key, p in entry["p1"].items():
            if len(key) != len(parents):
                raise ParamsError(f"{node}: row key {key!r} must have one bit per parent ({len(parents)})")
            table[tuple(int(c) for c in key)] = p
        cpts[node] = Cpt(node, parents, table)
    return BinaryScm(dag, cpts, doc.get("conditions", {}))


def load_params(dag: Dag, text: str) -> BinaryScm:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParamsError(f"parameter file is not JSON: {exc}") from None
    return params_from_dict(dag, doc)
