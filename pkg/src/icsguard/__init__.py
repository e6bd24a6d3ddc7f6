"""Least-cost disruption analysis for AND/OR dependency graphs.

The public surface re-exported here covers the typical workflow: load or
generate a model, compute the cheapest disruption, verify or export it.
"""

from .errors import AnalysisError, IcsguardError, InputError
from .generate import (
    AssignConfig,
    FixedCost,
    GenConfig,
    SplitMix64,
    UniformCostRange,
    assign_measures,
    generate_graph,
)
from .metric import (
    Solution,
    TargetIndestructible,
    build_wcnf,
    compute_metric,
    solution_problems,
    verify_solution,
)
from .model import (
    Cost,
    DependencyGraph,
    InvalidModel,
    MeasureInstance,
    Model,
    Node,
    NodeKind,
    validate_model,
)
from .modelio import (
    export_dot,
    export_wcnf,
    load_model,
    parse_model,
    save_model,
    write_model,
)
from .oracle import cheapest_disruption_exhaustive

__version__ = "0.1.0"

__all__ = [
    "AnalysisError",
    "AssignConfig",
    "Cost",
    "DependencyGraph",
    "FixedCost",
    "GenConfig",
    "IcsguardError",
    "InputError",
    "InvalidModel",
    "MeasureInstance",
    "Model",
    "Node",
    "NodeKind",
    "Solution",
    "SplitMix64",
    "TargetIndestructible",
    "UniformCostRange",
    "assign_measures",
    "build_wcnf",
    "cheapest_disruption_exhaustive",
    "compute_metric",
    "export_dot",
    "export_wcnf",
    "generate_graph",
    "load_model",
    "parse_model",
    "save_model",
    "solution_problems",
    "validate_model",
    "verify_solution",
    "write_model",
    "__version__",
]
