"""Classifier families trained on a single layer's activation matrix."""

from layerprobe.probes.ridge import (
    LinearProbe,
    ProbePrediction,
    SingularSystemError,
    fit_ridge,
    one_hot,
    predict_linear,
)
from layerprobe.probes.mlp import (
    DivergenceError,
    MlpConfig,
    MlpProbe,
    fit_mlp,
    mlp_loss_and_grads,
    predict_mlp,
)
from layerprobe.probes.forest import (
    ForestConfig,
    ForestProbe,
    HighCardinalityError,
    fit_forest_ova,
    forest_scores,
    predict_forest,
)
from layerprobe.probes.tuning import ProtocolError, TuneResult, tune

__all__ = [
    "LinearProbe",
    "ProbePrediction",
    "SingularSystemError",
    "fit_ridge",
    "one_hot",
    "predict_linear",
    "DivergenceError",
    "MlpConfig",
    "MlpProbe",
    "fit_mlp",
    "mlp_loss_and_grads",
    "predict_mlp",
    "ForestConfig",
    "ForestProbe",
    "HighCardinalityError",
    "fit_forest_ova",
    "forest_scores",
    "predict_forest",
    "ProtocolError",
    "TuneResult",
    "tune",
]
