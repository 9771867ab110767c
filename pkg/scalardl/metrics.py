import logging
from dataclasses import asdict, dataclass
from typing import Dict, Tuple

import numpy as np

from scalardl.core import DimensionError, ParamVector
from scalardl.objectives import DatasetHandle, SoftmaxCE
from scalardl.scalarization import CompositeObjective

logger = logging.getLogger(__name__)

# runs at or below this test accuracy count as failed to train
DEGENERATE_ACCURACY = 0.15


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    f1_macro: float
    per_class_f1: Tuple[float, ...]
    n_samples: int

    def to_dict(self) -> Dict:
        out = asdict(self)
        out["per_class_f1"] = list(self.per_class_f1)
        return out


def confusion_matrix(pred, labels, n_classes: int) -> np.ndarray:
    """
    conf[true, predicted] counts.
    """
    pred = np.asarray(pred, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if pred.shape != labels.shape:
        raise DimensionError(f"{pred.shape[0]} predictions for {labels.shape[0]} labels")
    conf = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(conf, (labels, pred), 1)
    return conf


def f1_scores(conf: np.ndarray) -> np.ndarray:
    """
    Per-class F1; classes never seen nor predicted score 0.
    """
    tp = np.diag(conf).astype(np.float64)
    fp = conf.sum(axis=0) - tp
    fn = conf.sum(axis=1) - tp
    denom = 2 * tp + fp + fn
    return np.divide(2 * tp, denom, out=np.zeros_like(tp), where=denom > 0)


def evaluate(theta: ParamVector, model: SoftmaxCE, data: DatasetHandle) -> EvalReport:
    if data.p * model.n_classes != model.dim:
        raise DimensionError(
            f"model expects {model.dim // model.n_classes} features, data has {data.p}"
        )
    pred = model.predict(theta, data.features)
    conf = confusion_matrix(pred, data.labels, model.n_classes)
    f1 = f1_scores(conf)
    return EvalReport(
        accuracy=float(np.trace(conf)) / data.n,
        f1_macro=float(np.mean(f1)),
        per_class_f1=tuple(float(v) for v in f1),
        n_samples=data.n,
    )


def gap_series(trace, comp: CompositeObjective, theta_star: ParamVector) -> np.ndarray:
    """
    F(Θᵗ) − F(θ*) for t = 1..T.
    """
    f_star = comp.F(theta_star)
    return np.array([comp.F(theta) - f_star for theta in trace.global_thetas])


def drift_series(trace) -> np.ndarray:
    """
    (T, τ) array of max_i ‖Θ_i^{t,k} − Θ̄^{t,k}‖².
    """
    return np.array([r.max_drift for r in trace.records], dtype=np.float64)


def run_status(trace_status: str, accuracy=None) -> str:
    if trace_status != "ok":
        return trace_status
    if accuracy is not None and accuracy <= DEGENERATE_ACCURACY:
        return "degenerate"
    return "ok"
