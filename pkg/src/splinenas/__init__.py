"""Ask-tell black-box optimizer over a bounded box.

Fits a cubic radial-basis surrogate through measured configurations,
searches its extremum with hierarchical Halton sampling, and iterates
suggest -> measure -> refit until prediction matches measurement.
"""

from .driver import (
    Study,
    StudyConfig,
    Suggestion,
    extend_space,
    import_point,
    init_study,
    record,
    run_loop,
    suggest,
)
from .evaluators import builtin_benchmark, run_external_evaluator
from .fixtures import load_fixture, load_reported_results
from .halton_search import SearchConfig, SearchReport, halton, halton_point, search
from .paramspace import Dimension, ParamSpace, admissible, initial_design
from .persistence import load_study, save_study, study_from_fixture
from .spline import SplineModel, SupportPoint, evaluate, evaluate_gradient, fit

__version__ = "0.1.0"

__all__ = [
    "Dimension",
    "ParamSpace",
    "SearchConfig",
    "SearchReport",
    "SplineModel",
    "Study",
    "StudyConfig",
    "Suggestion",
    "SupportPoint",
    "admissible",
    "builtin_benchmark",
    "evaluate",
    "evaluate_gradient",
    "extend_space",
    "fit",
    "halton",
    "halton_point",
    "import_point",
    "init_study",
    "initial_design",
    "load_fixture",
    "load_reported_results",
    "load_study",
    "record",
    "run_external_evaluator",
    "run_loop",
    "save_study",
    "search",
    "study_from_fixture",
    "suggest",
]
