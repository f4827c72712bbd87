import math

import numpy as np
import pytest

import proximity_ml
import scenario
from agent_helper.enums import AgentId, ModelKind
from data.models.frames import DatasetRow, GroundTruthFrame
from data.models.location import AnchorLayout, Position
from data.models.ml import FeatureRow, LinearModel, TrainConfig
from errors import DataError, TrainingError, ValidationError

ALL_KINDS = (ModelKind.LR, ModelKind.SGD_HINGE, ModelKind.LINEAR_SVC)


def separable_rows(exact, layout=AnchorLayout()) -> list[FeatureRow]:
    """Robot approaching a fixed human along the diagonal, no separation in (0.35, 0.65)."""
    hx, hy = 1.0, 1.0
    human = exact(AgentId.HUMAN, hx, hy, layout).quantized()
    rows = []
    for s in np.concatenate([np.linspace(0.05, 0.35, 60), np.linspace(0.65, 0.95, 60)]):
        rx, ry = hx + s / math.sqrt(2), hy + s / math.sqrt(2)
        robot = exact(AgentId.ROBOT, rx, ry, layout).quantized()
        truth = GroundTruthFrame(0.0, Position(hx, hy), Position(rx, ry))
        rows.append(DatasetRow(truth, human, robot, scenario.estimate_frame(0.0, human, robot, layout)))
    return proximity_ml.rows_from_dataset(rows)


def imbalanced_rows(exact, layout=AnchorLayout()) -> list[FeatureRow]:
    """One close frame in ten, same diagonal approach and gap as separable_rows."""
    hx, hy = 1.0, 1.0
    human = exact(AgentId.HUMAN, hx, hy, layout).quantized()
    rows = []
    for s in np.concatenate([np.linspace(0.05, 0.35, 12), np.linspace(0.65, 0.95, 108)]):
        rx, ry = hx + s / math.sqrt(2), hy + s / math.sqrt(2)
        robot = exact(AgentId.ROBOT, rx, ry, layout).quantized()
        truth = GroundTruthFrame(0.0, Position(hx, hy), Position(rx, ry))
        rows.append(DatasetRow(truth, human, robot, scenario.estimate_frame(0.0, human, robot, layout)))
    return proximity_ml.rows_from_dataset(rows)


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_separable_data_is_learned_perfectly(kind, exact):
    rows = separable_rows(exact)
    train_rows, test_rows = proximity_ml.split(rows, 0.8, seed=3)
    model = proximity_ml.train(train_rows, kind, TrainConfig.defaults_for(kind, seed=1))
    assert not model.degenerate
    for subset in (train_rows, test_rows):
        metrics = proximity_ml.evaluate(model, subset)
        assert metrics.accuracy == 1.0
        assert metrics.f1 == 1.0


def test_single_class_gives_constant_model(caplog, exact):
    rows = [r for r in separable_rows(exact) if r.label == 0]
    model = proximity_ml.train(rows, ModelKind.LR)
    assert model.degenerate
    assert model.bias < 0 and not any(model.weights)
    assert all(proximity_ml.predict(model, r.features).label == 0 for r in rows)
    assert "constant model" in caplog.text


def test_training_input_errors():
    with pytest.raises(TrainingError):
        proximity_ml.train([], ModelKind.LINEAR_SVC)
    rows = [FeatureRow((1.0, 2.0), 0), FeatureRow((2.0, 1.0), 1), FeatureRow((float("nan"), 1.0), 1)]
    with pytest.raises(DataError, match="row 2"):
        proximity_ml.train(rows, ModelKind.LR)


def _numeric_grad(f, w, b, h=1e-6):
    grad_w = np.zeros_like(w)
    for i in range(len(w)):
        step = np.zeros_like(w)
        step[i] = h
        grad_w[i] = (f(w + step, b) - f(w - step, b)) / (2 * h)
    grad_b = (f(w, b + h) - f(w, b - h)) / (2 * h)
    return grad_w, grad_b


@pytest.mark.parametrize("objective,param", [
    (proximity_ml.log_loss_objective, 1e-4),
    (proximity_ml.squared_hinge_objective, 1.0),
])
def test_gradients_match_finite_differences(objective, param):
    rng = np.random.default_rng(0)
    x = rng.normal(size=(40, 5))
    y = (rng.random(40) < 0.5).astype(float)
    for _ in range(100):
        w, b = rng.normal(size=5), float(rng.normal())
        _, grad_w, grad_b = objective(w, b, x, y, param)
        num_w, num_b = _numeric_grad(lambda ww, bb: objective(ww, bb, x, y, param)[0], w, b)
        analytic = np.append(grad_w, grad_b)
        numeric = np.append(num_w, num_b)
        assert np.linalg.norm(analytic - numeric) <= 1e-5 * max(1.0, np.linalg.norm(analytic))


def test_predict_zero_and_saturated_lr():
    zero = LinearModel(ModelKind.LR, (0.0,) * 3, 0.0, (0.0,) * 3, (1.0,) * 3)
    p = proximity_ml.predict(zero, [1.0, 2.0, 3.0])
    assert p.score == 0.5 and p.label == 0

    saturated = LinearModel(ModelKind.LR, (0.0,) * 3, 10.0, (0.0,) * 3, (1.0,) * 3)
    p = proximity_ml.predict(saturated, [1.0, 2.0, 3.0])
    assert p.score == pytest.approx(1.0, abs=1e-4) and p.label == 1


def test_hinge_labels_invariant_to_positive_rescaling():
    rng = np.random.default_rng(4)
    x = rng.normal(size=(200, 4))
    for kind in (ModelKind.SGD_HINGE, ModelKind.LINEAR_SVC):
        w, b = rng.normal(size=4), float(rng.normal())
        base = LinearModel(kind, tuple(w), b, (0.0,) * 4, (1.0,) * 4)
        for c in (0.01, 3.0, 250.0):
            scaled = LinearModel(kind, tuple(c * w), c * b, (0.0,) * 4, (1.0,) * 4)
            assert np.array_equal(proximity_ml.predict_many(base, x), proximity_ml.predict_many(scaled, x))


def test_predict_dimension_mismatch():
    model = LinearModel(ModelKind.LINEAR_SVC, (1.0, 1.0), 0.0, (0.0, 0.0), (1.0, 1.0))
    with pytest.raises(ValidationError):
        proximity_ml.predict(model, [1.0, 2.0, 3.0])


def test_metrics_examples():
    perfect = proximity_ml.metrics_from_labels([0, 1, 1, 0], [0, 1, 1, 0])
    assert perfect.accuracy == 1.0 and perfect.f1 == 1.0 and not perfect.degenerate

    all_close = proximity_ml.metrics_from_labels([0, 1, 0, 1], [1, 1, 1, 1])
    assert all_close.precision == 0.5
    assert all_close.recall == 1.0
    assert all_close.f1 == pytest.approx(2 / 3)

    none_close = proximity_ml.metrics_from_labels([0, 1, 0, 1], [0, 0, 0, 0])
    assert none_close.precision == 0.0 and none_close.f1 == 0.0
    assert none_close.degenerate
    assert none_close.accuracy == (none_close.tp + none_close.tn) / none_close.total

    with pytest.raises(DataError):
        proximity_ml.metrics_from_labels([], [])


def test_split_sizes_and_determinism():
    rows = [FeatureRow((float(i),), i % 2) for i in range(10)]
    train_rows, test_rows = proximity_ml.split(rows, 0.8, seed=5)
    assert (len(train_rows), len(test_rows)) == (8, 2)
    assert proximity_ml.split(rows, 0.8, seed=5) == (train_rows, test_rows)
    assert sorted(r.features for r in train_rows + test_rows) == sorted(r.features for r in rows)


def test_split_is_stratified():
    rows = [FeatureRow((float(i),), int(i < 12)) for i in range(30)]
    for seed in range(10):
        train_rows, test_rows = proximity_ml.split(rows, 0.7, seed=seed)
        assert abs(sum(r.label for r in train_rows) - 0.4 * len(train_rows)) <= 1
        assert abs(sum(r.label for r in test_rows) - 0.4 * len(test_rows)) <= 1


def test_split_errors():
    with pytest.raises(DataError):
        proximity_ml.split([FeatureRow((1.0,), 0)], 0.5, seed=0)
    with pytest.raises(DataError):
        proximity_ml.split([FeatureRow((1.0,), 0), FeatureRow((2.0,), 1)], 0.9, seed=0)


def test_training_is_deterministic(exact):
    rows = separable_rows(exact)
    for kind in ALL_KINDS:
        cfg = TrainConfig.defaults_for(kind, seed=8)
        assert proximity_ml.train(rows, kind, cfg) == proximity_ml.train(rows, kind, cfg)


def test_affine_rescaling_of_a_column_keeps_predictions(exact):
    rows = separable_rows(exact)
    rescaled = [FeatureRow(r.features[:3] + (r.features[3] * 3.0 + 5.0,) + r.features[4:], r.label) for r in rows]
    a = proximity_ml.train(rows, ModelKind.LR)
    b = proximity_ml.train(rescaled, ModelKind.LR)
    xa = np.array([r.features for r in rows])
    xb = np.array([r.features for r in rescaled])
    assert np.array_equal(proximity_ml.predict_many(a, xa), proximity_ml.predict_many(b, xb))


def test_model_json_round_trip(exact):
    model = proximity_ml.train(separable_rows(exact), ModelKind.LINEAR_SVC)
    assert LinearModel.from_dict(model.to_dict()) == model
    assert model.to_dict()["kind"] == "LINEAR_SVC"


def test_train_config_validation():
    with pytest.raises(ValidationError):
        TrainConfig(learning_rate=0.0, epochs=10)
    with pytest.raises(ValidationError):
        TrainConfig(learning_rate=0.1, epochs=0)
    with pytest.raises(ValidationError):
        TrainConfig(learning_rate=0.1, epochs=10, train_fraction=1.0)


def test_hinge_objective_at_origin_is_one():
    x = np.ones((4, 3))
    y = np.array([0.0, 1.0, 0.0, 1.0])
    assert proximity_ml.hinge_objective(np.zeros(3), 0.0, x, y, 0.01) == pytest.approx(1.0)


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_rare_positive_class_is_still_separated(kind, exact):
    rows = imbalanced_rows(exact)
    assert sum(r.label for r in rows) == 12
    x = np.array([r.features for r in rows])
    y = np.array([r.label for r in rows])
    mean, std = proximity_ml.fit_scaler(x)
    sep = (x[:, -1] - mean[-1]) / std[-1]
    assert sep[y == 0].min() - sep[y == 1].max() >= 0.1

    model = proximity_ml.train(rows, kind, TrainConfig.defaults_for(kind, seed=2))
    metrics = proximity_ml.evaluate(model, rows)
    assert metrics.accuracy == 1.0
    assert metrics.f1 == 1.0
