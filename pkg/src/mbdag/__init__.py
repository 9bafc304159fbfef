"""Structural analysis of measurement bias in causal diagrams."""

from .bias import (
    Differentiality,
    DifferentialityVerdict,
    Direction,
    EffectQuery,
    EffectReport,
    FeatureSet,
    Mechanism,
    Mode,
    SingletonReport,
    analyze_effect,
    classify_path,
    detect_features,
    differentiality_derived_mode,
    differentiality_table_mode,
    singleton_report,
)
from .dag import Dag, MeasurementBinding, Role, ValidationReport
from .dsl import DslParseFailure, ParseError, parse, serialize, to_dot
from .paths import Path, PathVerdict, d_separated, enumerate_paths, path_status
from .scenarios import SCENARIO_NAMES, ScenarioSpec, builtin_scenario
from .scm import (
    BinaryScm,
    Cpt,
    JointDistribution,
    Reading,
    differentiality_empirical,
    error_summary,
    exact_joint,
    misclassification_matrix,
    sample,
    substitution_estimates,
)

__version__ = "0.1.0"
