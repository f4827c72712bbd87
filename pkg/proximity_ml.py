"""
Linear proximity classifiers: logistic regression, SGD with hinge loss and
a linear SVC (squared hinge), trained on standardised positioning features
to predict the close / not-close label.
"""
import logging
from typing import Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from agent_helper.enums import ModelKind
from data.models.frames import DatasetRow, EstimatedFrame
from data.models.location import DistanceVector
from data.models.ml import EvalMetrics, FeatureRow, LinearModel, Prediction, TrainConfig
from errors import DataError, TrainingError, ValidationError
from rng import make_generator

logger = logging.getLogger("ips.proximity_ml")

# Bias magnitude of the constant model fitted to single-class data.
CONSTANT_BIAS = 1.0


# ==========================================================
# FEATURES
# ==========================================================

def feature_vector(human: DistanceVector, robot: DistanceVector, frame: EstimatedFrame) -> np.ndarray:
    return np.array([
        human.d1, human.d2, human.d3,
        robot.d1, robot.d2, robot.d3,
        frame.human_est.x, frame.human_est.y,
        frame.robot_est.x, frame.robot_est.y,
        frame.sep_est,
    ])


def rows_from_dataset(rows: Sequence[DatasetRow]) -> list[FeatureRow]:
    return [
        FeatureRow(tuple(feature_vector(r.human, r.robot, r.estimate)), r.truth.true_label)
        for r in rows
    ]


def _matrix(rows: Sequence[FeatureRow]) -> tuple[np.ndarray, np.ndarray]:
    if not rows:
        raise TrainingError("no rows")
    dim = len(rows[0].features)
    for i, row in enumerate(rows):
        if len(row.features) != dim:
            raise DataError(f"expected {dim} features, got {len(row.features)}", row=i)
        if not np.all(np.isfinite(row.features)):
            raise DataError("non-finite feature value", row=i)
    x = np.array([row.features for row in rows], dtype=float)
    y = np.array([row.label for row in rows], dtype=float)
    return x, y


def fit_scaler(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-column mean and std; constant columns get std 1."""
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std[std == 0] = 1.0
    return mean, std


# ==========================================================
# OBJECTIVES
# ==========================================================

def log_loss_objective(w: np.ndarray, b: float, x: np.ndarray, y: np.ndarray, l2_lambda: float):
    """Mean log-loss + l2 * |w|^2 and its gradient; y in {0, 1}."""
    z = x @ w + b
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z) + l2_lambda * (w @ w))
    err = expit(z) - y
    grad_w = x.T @ err / len(y) + 2.0 * l2_lambda * w
    grad_b = float(np.mean(err))
    return loss, grad_w, grad_b


def squared_hinge_objective(w: np.ndarray, b: float, x: np.ndarray, y: np.ndarray, c_param: float):
    """0.5 |w|^2 + C * sum(max(0, 1 - y s)^2) and its gradient; y in {0, 1}.

    The data term is summed over rows, not averaged.
    """
    signs = 2.0 * y - 1.0
    slack = np.maximum(0.0, 1.0 - signs * (x @ w + b))
    loss = float(0.5 * (w @ w) + c_param * np.sum(slack ** 2))
    coef = -2.0 * c_param * slack * signs
    grad_w = w + x.T @ coef
    grad_b = float(np.sum(coef))
    return loss, grad_w, grad_b


def hinge_objective(w: np.ndarray, b: float, x: np.ndarray, y: np.ndarray, l2_lambda: float) -> float:
    signs = 2.0 * y - 1.0
    return float(np.mean(np.maximum(0.0, 1.0 - signs * (x @ w + b))) + l2_lambda * (w @ w))


# ==========================================================
# TRAINING
# ==========================================================

def _fit_lr(x, y, cfg: TrainConfig):
    w, b = np.zeros(x.shape[1]), 0.0
    for _ in range(cfg.epochs):
        _, grad_w, grad_b = log_loss_objective(w, b, x, y, cfg.l2_lambda)
        w -= cfg.learning_rate * grad_w
        b -= cfg.learning_rate * grad_b
    return w, b


def _fit_sgd_hinge(x, y, cfg: TrainConfig):
    rng = make_generator(cfg.seed)
    signs = 2.0 * y - 1.0
    w, b = np.zeros(x.shape[1]), 0.0
    lr, l2 = cfg.learning_rate, cfg.l2_lambda
    for _ in range(cfg.epochs):
        for i in rng.permutation(len(y)):
            if signs[i] * (x[i] @ w + b) < 1.0:
                w -= lr * (2.0 * l2 * w - signs[i] * x[i])
                b += lr * signs[i]
            else:
                w -= lr * 2.0 * l2 * w
    logger.debug("sgd_hinge final objective %.6f", hinge_objective(w, b, x, y, l2))
    return w, b


def _fit_linear_svc(x, y, cfg: TrainConfig):
    def objective(theta):
        loss, grad_w, grad_b = squared_hinge_objective(theta[:-1], theta[-1], x, y, cfg.c_param)
        return loss, np.append(grad_w, grad_b)

    result = minimize(objective, np.zeros(x.shape[1] + 1), jac=True, method="L-BFGS-B",
                      options={"maxiter": cfg.epochs})
    if not result.success:
        logger.warning("linear_svc solver stopped early: %s", result.message)
    return result.x[:-1], float(result.x[-1])


_TRAINERS = {
    ModelKind.LR: _fit_lr,
    ModelKind.SGD_HINGE: _fit_sgd_hinge,
    ModelKind.LINEAR_SVC: _fit_linear_svc,
}


def train(rows: Sequence[FeatureRow], kind: ModelKind, cfg: TrainConfig | None = None) -> LinearModel:
    cfg = cfg or TrainConfig.defaults_for(kind)
    x, y = _matrix(rows)
    mean, std = fit_scaler(x)

    classes = np.unique(y)
    if len(classes) == 1:
        only = int(classes[0])
        logger.warning("%s: training rows hold only label %d; fitting a constant model", kind.value, only)
        bias = CONSTANT_BIAS if only == 1 else -CONSTANT_BIAS
        return LinearModel(kind, tuple([0.0] * x.shape[1]), bias,
                           tuple(mean), tuple(std), degenerate=True)

    w, b = _TRAINERS[kind]((x - mean) / std, y, cfg)
    logger.info("Trained %s on %d rows (%d positive)", kind.value, len(y), int(y.sum()))
    return LinearModel(kind, tuple(float(v) for v in w), float(b), tuple(mean), tuple(std))


# ==========================================================
# PREDICTION & EVALUATION
# ==========================================================

def decision_scores(model: LinearModel, x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != model.dimension:
        raise ValidationError(f"expected {model.dimension} features, got {x.shape[1]}")
    z = ((x - np.asarray(model.scaler_mean)) / np.asarray(model.scaler_std)) @ np.asarray(model.weights)
    return z + model.bias


def predict_many(model: LinearModel, x: np.ndarray) -> np.ndarray:
    """Labels for every row of ``x``; a score of exactly 0 (p = 0.5) is 0."""
    return (decision_scores(model, x) > 0).astype(int)


def predict(model: LinearModel, features: Sequence[float]) -> Prediction:
    z = float(decision_scores(model, features)[0])
    label = 1 if z > 0 else 0
    if model.kind is ModelKind.LR:
        return Prediction(label=label, score=float(expit(z)))
    return Prediction(label=label, score=z)


def metrics_from_labels(y_true: np.ndarray, y_pred: np.ndarray) -> EvalMetrics:
    y_true = np.asarray(y_true, dtype=int)
    y_pred = np.asarray(y_pred, dtype=int)
    if len(y_true) == 0:
        raise DataError("no rows to evaluate")
    tp = int(np.sum((y_pred == 1) & (y_true == 1)))
    fp = int(np.sum((y_pred == 1) & (y_true == 0)))
    tn = int(np.sum((y_pred == 0) & (y_true == 0)))
    fn = int(np.sum((y_pred == 0) & (y_true == 1)))

    degenerate = False
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if tp + fp == 0 or tp + fn == 0:
        degenerate = True
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return EvalMetrics(
        accuracy=(tp + tn) / len(y_true),
        precision=precision, recall=recall, f1=f1,
        tp=tp, fp=fp, tn=tn, fn=fn, degenerate=degenerate,
    )


def evaluate(model: LinearModel, rows: Sequence[FeatureRow]) -> EvalMetrics:
    if not rows:
        raise DataError("no rows to evaluate")
    x, y = _matrix(rows)
    return metrics_from_labels(y, predict_many(model, x))


def split(rows: Sequence[FeatureRow], train_fraction: float, seed: int) -> tuple[list[FeatureRow], list[FeatureRow]]:
    """Seeded shuffle and partition, stratified by label.

    The train size is round(fraction * n); each class contributes its
    floor share and leftover slots go to the largest remainders.
    """
    n = len(rows)
    if n < 2:
        raise DataError(f"need at least 2 rows to split, got {n}")
    if not 0.0 < train_fraction < 1.0:
        raise ValidationError(f"train_fraction must be in (0, 1), got {train_fraction}")
    n_train = int(round(train_fraction * n))
    if n_train < 1 or n_train > n - 1:
        raise DataError(f"fraction {train_fraction} leaves an empty partition for {n} rows")

    rng = make_generator(seed)
    by_class: dict[int, list[int]] = {}
    for i, row in enumerate(rows):
        by_class.setdefault(row.label, []).append(i)
    labels = sorted(by_class)
    shuffled = {label: [by_class[label][j] for j in rng.permutation(len(by_class[label]))] for label in labels}

    exact = {label: train_fraction * len(shuffled[label]) for label in labels}
    quota = {label: int(np.floor(exact[label])) for label in labels}
    leftover = n_train - sum(quota.values())
    for label in sorted(labels, key=lambda lb: (-(exact[lb] - quota[lb]), lb))[:max(leftover, 0)]:
        quota[label] += 1

    train_idx, test_idx = [], []
    for label in labels:
        train_idx += shuffled[label][:quota[label]]
        test_idx += shuffled[label][quota[label]:]
    order = rng.permutation(n)
    rank = {idx: pos for pos, idx in enumerate(order)}
    train_idx.sort(key=rank.__getitem__)
    test_idx.sort(key=rank.__getitem__)
    return [rows[i] for i in train_idx], [rows[i] for i in test_idx]
