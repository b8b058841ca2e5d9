"""Fair DNF rule sets via column generation over in-repo LP/MIP solvers."""

from .errors import (
    ConfigError,
    CyclingError,
    DataError,
    FairCGError,
    InfeasibleError,
    SolverError,
)
from .data import (
    BinaryDataset,
    BinFeature,
    BinFeatureMap,
    FoldPlan,
    RawTable,
    binarize,
    ingest_csv,
    make_folds,
    preprocess_compas,
)
from .master import (
    EQ_ODDS,
    EQ_OPP,
    HAMMING,
    NO_FAIRNESS,
    ZERO_ONE,
    Clause,
    FairnessSpec,
    MasterConfig,
    RuleSet,
    build_master_hamming,
    build_master_zero_one,
)
from .colgen import ColGenConfig, ColGenTrace, TrainResult, run_colgen, train
from .evaluation import (
    FrontierPoint,
    MetricsReport,
    build_frontier,
    cross_validate,
    evaluate,
    predict,
)
from .mine import MineGrid, extract_rules, fit_forest, fit_tree, mine_warm_start

__all__ = [
    "BinaryDataset", "BinFeature", "BinFeatureMap", "Clause", "ColGenConfig",
    "ColGenTrace", "ConfigError", "CyclingError", "DataError", "EQ_ODDS",
    "EQ_OPP", "FairCGError", "FairnessSpec", "FoldPlan", "FrontierPoint",
    "HAMMING", "InfeasibleError", "MasterConfig", "MetricsReport", "MineGrid",
    "NO_FAIRNESS", "RawTable", "RuleSet", "SolverError", "TrainResult",
    "ZERO_ONE", "binarize", "build_frontier", "build_master_hamming",
    "build_master_zero_one", "cross_validate", "evaluate", "extract_rules",
    "fit_forest", "fit_tree", "ingest_csv", "make_folds", "mine_warm_start",
    "predict", "preprocess_compas", "run_colgen", "train",
]

__version__ = "0.1.0"
