from indisup.app.services.training.config import TrainConfig, derive_seeds
from indisup.app.services.training.evaluation import (
    RunReport,
    WellPrediction,
    evaluate,
    evaluate_predictions,
    predict_well,
    window_starts,
)
from indisup.app.services.training.experiments import (
    RepeatedSummary,
    RunArtifacts,
    RunOutcome,
    SweepRow,
    prediction_descent,
    run_repeated,
    run_single,
    run_sweep,
)
from indisup.app.services.training.trainer import TrainResult, initial_parameters, train

__all__ = [
    "RepeatedSummary",
    "RunArtifacts",
    "RunOutcome",
    "RunReport",
    "SweepRow",
    "TrainConfig",
    "TrainResult",
    "WellPrediction",
    "derive_seeds",
    "evaluate",
    "evaluate_predictions",
    "initial_parameters",
    "predict_well",
    "prediction_descent",
    "run_repeated",
    "run_single",
    "run_sweep",
    "train",
    "window_starts",
]
