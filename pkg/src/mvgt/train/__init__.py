"""Training loop, metrics and the ablation sweep."""

from .ablation import ABLATION_ROWS, AblationRow, ablation_sweep, row_config, write_ablation_csv
from .loop import (
    StopTraining,
    TrainResult,
    TrainSpec,
    evaluate,
    fit,
    split_by_trial,
    train,
)
from .metrics import EvalReport, confusion, cross_entropy, predict_labels, write_curve_csv

__all__ = [
    "ABLATION_ROWS", "AblationRow", "EvalReport", "StopTraining", "TrainResult", "TrainSpec",
    "ablation_sweep", "confusion", "cross_entropy", "evaluate", "fit", "predict_labels",
    "row_config", "split_by_trial", "train", "write_ablation_csv", "write_curve_csv",
]
