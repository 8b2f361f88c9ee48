"""Decision-network engine for estimating staff-training need and cost.

The library layers are importable on their own: :mod:`mast.diagram` holds the
generic influence-diagram model, :mod:`mast.inference` the exact engine,
:mod:`mast.model` the staff-training model builder, and :mod:`mast.model_io`
the file formats. The HTTP service lives in :mod:`mast.service`, the CLI in
:mod:`mast.cli`.
"""

from .diagram import (
    ChanceNode,
    CptTable,
    DiagramError,
    InfluenceDiagram,
    OutcomeScale,
    UtilityNode,
    Violation,
    topological_order,
    validate,
)
from .inference import (
    Evidence,
    ImpossibleEvidenceError,
    InferenceError,
    InferenceResult,
    Posterior,
    SensitivityResult,
    SensitivityRow,
    StateSpaceLimitError,
    expected_utility,
    infer,
    posterior,
    sensitivity,
)
from .model import (
    DEFAULT_BASE_COST,
    DEFAULT_OUTCOME_VALUES,
    FACTOR_IDS,
    MastModel,
    RiskFactor,
    TrainingEstimate,
    build_model,
    contribution,
    generate_cpt,
    infer_training,
    risk_exposure,
)
from .model_io import (
    ModelDocument,
    ModelFormatError,
    XdslImportWarning,
    export_xdsl,
    import_xdsl,
    load_document,
    load_model,
    save_model,
)

__version__ = "0.1.0"

__all__ = [
    "ChanceNode",
    "CptTable",
    "DEFAULT_BASE_COST",
    "DEFAULT_OUTCOME_VALUES",
    "DiagramError",
    "Evidence",
    "FACTOR_IDS",
    "ImpossibleEvidenceError",
    "InferenceError",
    "InferenceResult",
    "InfluenceDiagram",
    "MastModel",
    "ModelDocument",
    "ModelFormatError",
    "OutcomeScale",
    "Posterior",
    "RiskFactor",
    "SensitivityResult",
    "SensitivityRow",
    "StateSpaceLimitError",
    "TrainingEstimate",
    "UtilityNode",
    "Violation",
    "XdslImportWarning",
    "build_model",
    "contribution",
    "expected_utility",
    "export_xdsl",
    "generate_cpt",
    "import_xdsl",
    "infer",
    "infer_training",
    "load_document",
    "load_model",
    "posterior",
    "risk_exposure",
    "save_model",
    "sensitivity",
    "topological_order",
    "validate",
]
