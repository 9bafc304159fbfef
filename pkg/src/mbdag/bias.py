"""Mechanism detection and the differential/non-differential misclassification scheme.

The exposure/outcome pair is described by an :class:`EffectQuery` naming the
true variables (A, Y) and their measured proxies (A*, Y*). Association
between A* and Y* is split into the substitution path A* <- A -> ... -> Y -> Y*
(the association the study actually wants) and redundant open paths, each
labelled with the mechanism that created it.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

from .dag import Dag, Role
from .errors import InvalidQuery, NotAProxy, PathNotOpen, TooManyPaths, WrongEndpoints
from .paths import PATH_LIMIT, Arrow, PathVerdict, Shape, d_separated, enumerate_paths, path_status


class Mechanism(enum.Enum):
    SUBSTITUTION = "substitution"
    COMMON_CAUSE = "common_cause"
    CONDITIONED_COMMON_OUTCOME = "conditioned_common_outcome"
    CAUSAL_FORWARD = "causal_forward"
    CAUSAL_REVERSE = "causal_reverse"
    DEPENDENT_MEASUREMENT = "dependent_measurement"


class Differentiality(enum.Enum):
    NON_DIFFERENTIAL = "non_differential"
    DIFFERENTIAL = "differential"


class Direction(enum.Enum):
    NONE = "none"
    UNIDIRECTIONAL_OUTCOME = "unidirectional_outcome"
    UNIDIRECTIONAL_EXPOSURE = "unidirectional_exposure"
    BIDIRECTIONAL = "bidirectional"


class Mode(enum.Enum):
    TABLE = "table"
    DERIVED = "derived"


NON = Differentiality.NON_DIFFERENTIAL
DIFF = Differentiality.DIFFERENTIAL


@dataclass(frozen=True)
class EffectQuery:
    exposure: str
    outcome: str
    exposure_proxy: str
    outcome_proxy: str

    def check(self, dag: Dag):
        names = (self.exposure, self.outcome, self.exposure_proxy, self.outcome_proxy)
        dag._require(*names)
        if len(set(names)) != 4:
            raise InvalidQuery("exposure, outcome and both proxies must be four distinct nodes")
        for p in (self.exposure_proxy, self.outcome_proxy):
            if dag.roles[p] is not Role.MEASURED:
                raise NotAProxy(p)


@dataclass(frozen=True)
class FeatureSet:
    non_null_effect: bool = False
    common_cause: bool = False
    conditioned_common_outcome: bool = False
    causal_forward: bool = False
    causal_reverse: bool = False
    dependent_measurement: bool = False


def direction_of(outcome_proxy: Differentiality, exposure_proxy: Differentiality) -> Direction:
    if outcome_proxy is DIFF and exposure_proxy is DIFF:
        return Direction.BIDIRECTIONAL
    if outcome_proxy is DIFF:
        return Direction.UNIDIRECTIONAL_OUTCOME
    if exposure_proxy is DIFF:
        return Direction.UNIDIRECTIONAL_EXPOSURE
    return Direction.NONE


@dataclass(frozen=True)
class DifferentialityVerdict:
    """``outcome_proxy``: is Y* misclassified depending on the exposure.
    ``exposure_proxy``: is A* misclassified depending on the outcome."""

    outcome_proxy: Differentiality
    exposure_proxy: Differentiality
    mode: Mode
    paper_conflict: bool = False

    @property
    def direction(self) -> Direction:
        return direction_of(self.outcome_proxy, self.exposure_proxy)

    def same_verdict(self, other: "DifferentialityVerdict") -> bool:
        return (self.outcome_proxy, self.exposure_proxy) == (other.outcome_proxy, other.exposure_proxy)


@dataclass(frozen=True)
class EffectReport:
    query: EffectQuery
    features: FeatureSet
    paths: tuple[PathVerdict, ...]
    substitution_path: PathVerdict | None
    redundant_open_paths: tuple[tuple[PathVerdict, Mechanism], ...]
    verdict_table: DifferentialityVerdict
    verdict_derived: DifferentialityVerdict

    @property
    def blocked_paths(self):
        return tuple(pv for pv in self.paths if not pv.open)

    @property
    def substituted_estimate_biased(self) -> bool:
        return bool(self.redundant_open_paths)

    @property
    def paper_conflict(self) -> bool:
        return self.verdict_derived.paper_conflict


@dataclass(frozen=True)
class SingletonReport:
    proxy: str
    true_parent: str | None
    non_true_influences: tuple[tuple[str, ...], ...] = field(default=())

    @property
    def perfect_copy(self) -> bool:
        return self.true_parent is not None and not self.non_true_influences


# -- singleton measurement -------------------------------------------------

def singleton_report(dag: Dag, proxy: str, given=None) -> SingletonReport:
    """Directed influence chains into ``proxy`` other than those from its true variable.

    Each chain is extended backwards to a root, stopping early at the true
    variable; chains that start at the true variable, or that pass through a
    conditioned node, are not reported.
    """
    if dag.role(proxy) is not Role.MEASURED:
        raise NotAProxy(proxy)
    z = dag.conditioned if given is None else frozenset(given)
    binding = dag.binding(proxy)
    if binding is not None:
        true_parent = binding.true_var
    else:
        candidates = sorted(p for p in dag.parents(proxy) if dag.roles[p] is Role.TRUE)
        true_parent = candidates[0] if len(candidates) == 1 else None

    chains = []

    def extend(chain):
        head = chain[0]
        parents = sorted(dag.parents(head))
        if head == true_parent or not parents:
            if head != true_parent:
                chains.append(chain)
            if len(chains) > PATH_LIMIT:
                raise TooManyPaths(head, proxy, PATH_LIMIT)
            return
        for p in parents:
            extend((p,) + chain)

    for p in sorted(dag.parents(proxy)):
        if p != true_parent and p not in z:
            extend((p, proxy))
    chains = [c for c in chains if not (set(c[1:-1]) & z) and c[0] not in z]
    return SingletonReport(proxy, true_parent, tuple(sorted(set(chains))))


# -- features -------------------------------------------------------------

def detect_features(dag: Dag, q: EffectQuery) -> FeatureSet:
    q.check(dag)
    a, y, a_star, y_star = q.exposure, q.outcome, q.exposure_proxy, q.outcome_proxy
    proxies = {n for n, r in dag.roles.items() if r is Role.MEASURED}

    non_null = dag.reaches(a, y, avoid=proxies)
    forward = dag.reaches(a_star, y_star)
    reverse = dag.reaches(y_star, a_star)

    common_outcomes = dag.descendants(a_star) & dag.descendants(y_star)
    conditioned_outcome = any(
        s in dag.conditioned or dag.descendants(s) & dag.conditioned
        for s in common_outcomes
    )

    common_cause = dependent = False
    # legs may not pass through the true variables or the other proxy
    avoid = {a, y, a_star, y_star}
    systems = {n for n, r in dag.roles.items() if r is Role.SYSTEM}
    for c in dag.nodes:
        if c in (a, y, a_star, y_star):
            continue
        if not (dag.reaches(c, a_star, avoid) and dag.reaches(c, y_star, avoid)):
            continue
        common_cause = True
        if c in systems or _leg_through(dag, c, a_star, avoid, systems) \
                or _leg_through(dag, c, y_star, avoid, systems):
            dependent = True
    return FeatureSet(non_null, common_cause, conditioned_outcome, forward, reverse, dependent)


def _leg_through(dag, src, dst, avoid, via):
    """Is there a directed src -> ... -> dst path (interior avoiding ``avoid``) through a ``via`` node?"""
    for m in via:
        if m in avoid or m in (src, dst):
            continue
        if dag.reaches(src, m, avoid) and dag.reaches(m, dst, avoid):
            return True
    return False


# -- path classification ---------------------------------------------------

def _oriented(pv: PathVerdict, q: EffectQuery):
    ends = (pv.path.nodes[0], pv.path.nodes[-1])
    if ends == (q.exposure_proxy, q.outcome_proxy):
        return pv.path
    if ends == (q.outcome_proxy, q.exposure_proxy):
        return pv.path.reversed()
    raise WrongEndpoints(f"path {pv.path} does not join {q.exposure_proxy} and {q.outcome_proxy}")


def is_substitution(dag: Dag, pv: PathVerdict, q: EffectQuery) -> bool:
    """A* <- A -> ... -> Y -> Y* with only true variables between the proxies."""
    path = _oriented(pv, q)
    nodes, arrows = path.nodes, path.arrows
    return (
        len(nodes) >= 4
        and nodes[1] == q.exposure
        and nodes[-2] == q.outcome
        and arrows[0] is Arrow.BACKWARD
        and all(a is Arrow.FORWARD for a in arrows[1:])
        and all(dag.roles[n] is Role.TRUE for n in nodes[1:-1])
    )


def classify_path(dag: Dag, pv: PathVerdict, q: EffectQuery) -> Mechanism:
    if not pv.open:
        raise PathNotOpen(f"path {pv.path} is blocked")
    path = _oriented(pv, q)
    if is_substitution(dag, pv, q):
        return Mechanism.SUBSTITUTION
    if all(a is Arrow.FORWARD for a in path.arrows):
        return Mechanism.CAUSAL_FORWARD
    if all(a is Arrow.BACKWARD for a in path.arrows):
        return Mechanism.CAUSAL_REVERSE
    if any(t.shape is Shape.COLLIDER for t in pv.triples):
        return Mechanism.CONDITIONED_COMMON_OUTCOME
    if any(dag.roles[n] is Role.SYSTEM for n in path.interior):
        return Mechanism.DEPENDENT_MEASUREMENT
    return Mechanism.COMMON_CAUSE


# -- differentiality -------------------------------------------------------

def differentiality_table_mode(f: FeatureSet) -> DifferentialityVerdict:
    """Rule table: a null effect is non-differential for every mechanism;
    otherwise a conditioned common outcome makes both proxies differential
    and a causal proxy-to-proxy link makes only the receiving proxy differential.
    Common causes and dependent measurement systems stay non-differential."""
    if not f.non_null_effect:
        return DifferentialityVerdict(NON, NON, Mode.TABLE)
    outcome = DIFF if (f.conditioned_common_outcome or f.causal_forward) else NON
    exposure = DIFF if (f.conditioned_common_outcome or f.causal_reverse) else NON
    return DifferentialityVerdict(outcome, exposure, Mode.TABLE)


def differentiality_derived_mode(dag: Dag, q: EffectQuery) -> DifferentialityVerdict:
    """Error of one proxy depends on the other true variable, given its own true value."""
    q.check(dag)
    z = dag.conditioned
    outcome = NON if d_separated(dag, q.exposure, q.outcome_proxy, {q.outcome} | z) else DIFF
    exposure = NON if d_separated(dag, q.outcome, q.exposure_proxy, {q.exposure} | z) else DIFF
    derived = DifferentialityVerdict(outcome, exposure, Mode.DERIVED)
    table = differentiality_table_mode(detect_features(dag, q))
    return replace(derived, paper_conflict=not derived.same_verdict(table))


def analyze_effect(dag: Dag, q: EffectQuery) -> EffectReport:
    features = detect_features(dag, q)
    verdicts = tuple(
        path_status(dag, p)
        for p in enumerate_paths(dag, q.exposure_proxy, q.outcome_proxy)
    )
    # With mediators several paths have the substitution shape; the shortest
    # carries the label and the others are effect paths, never redundant.
    shaped = [pv for pv in verdicts if is_substitution(dag, pv, q)]
    substitution = min(shaped, key=lambda pv: len(pv.path.nodes)) if shaped else None
    redundant = [
        (pv, classify_path(dag, pv, q))
        for pv in verdicts
        if pv.open and pv not in shaped
    ]
    return EffectReport(
        query=q,
        features=features,
        paths=verdicts,
        substitution_path=substitution,
        redundant_open_paths=tuple(redundant),
        verdict_table=differentiality_table_mode(features),
        verdict_derived=differentiality_derived_mode(dag, q),
    )
