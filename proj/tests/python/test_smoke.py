import numpy as np
import pytest

import qs3orao


def blobs(per_class, seed, noise=0.3):
    rng = np.random.default_rng(seed)
    y = np.tile([1, 2, 3], per_class)
    x = (2.0 * (y - 2) + noise * rng.standard_normal(y.size)).reshape(-1, 1)
    return qs3orao.Dataset(x, y.tolist())


@pytest.fixture(scope="module")
def model():
    data = blobs(100, 1)
    cfg = qs3orao.TrainConfig()
    cfg.m = 16
    cfg.t_max = 200
    cfg.batch = 2
    return qs3orao.train(qs3orao.split(data, 45, 2), cfg)


def test_dataset_round_trip():
    d = blobs(4, 0)
    assert len(d) == 12
    assert d.k == 3
    assert d.x.shape == (12, 1)
    assert d.priors == pytest.approx([1 / 3] * 3)


def test_missing_class_cannot_be_split():
    d = qs3orao.Dataset(np.array([[0.1], [0.2]]), [1, 3])
    with pytest.raises(qs3orao.ValidationError):
        qs3orao.split(d, 2, 1)


def test_normalize_and_discretize():
    d = qs3orao.normalize(qs3orao.Dataset(np.array([[2.0], [4.0], [6.0]]), [1, 2, 2]))
    assert d.x[:, 0].tolist() == [0.0, 0.5, 1.0]
    assert qs3orao.discretize([0.3, 0.1, 0.2, 0.4], 2).tolist() == [2, 1, 1, 2]


def test_auc_and_thresholds():
    assert qs3orao.auc([0.9, 0.1, 0.5], [True, False, False]) == 1.0
    assert qs3orao.auc([1.0, 1.0], [True, False]) == 0.5
    b = qs3orao.fit_thresholds([-2.0, 0.0, 2.0], [1, 2, 3], 3)
    assert b == pytest.approx([-1.0, 1.0])


def test_train_evaluate(model):
    test = blobs(100, 3)
    scores = model.scores(test.x)
    assert scores.shape == (300,)
    metrics = qs3orao.evaluate(model, test)
    assert metrics["overall_auc"] >= 0.95
    assert len(metrics["per_subproblem_auc"]) == 2
    labels = model.labels(test.x)
    assert set(labels.tolist()) <= {1, 2, 3}
    assert model.t == 200
    assert model.coefficients.shape == (200, 32)


def test_persistence(model, tmp_path):
    blob = model.to_bytes()
    again = qs3orao.Model.from_bytes(blob)
    assert again == model
    assert again.to_bytes() == blob
    path = tmp_path / "m.bin"
    model.save(path)
    assert qs3orao.load_model(path) == model
    with pytest.raises(qs3orao.ModelFormatError):
        qs3orao.Model.from_bytes(b"XXXX" + blob[4:])


def test_determinism():
    data = blobs(30, 5)
    s = qs3orao.split(data, 30, 6)
    cfg = qs3orao.TrainConfig()
    cfg.m = 4
    cfg.t_max = 20
    a = qs3orao.train(s, cfg)
    b = qs3orao.train(s, cfg)
    np.testing.assert_array_equal(a.coefficients, b.coefficients)


def test_bad_config():
    s = qs3orao.split(blobs(10, 7), 15, 8)
    cfg = qs3orao.TrainConfig()
    cfg.theta = 0.5
    with pytest.raises(qs3orao.ConfigError):
        qs3orao.train(s, cfg)
