import json

import numpy as np
import pytest

import pmdeg


def test_feature_names_and_extraction():
    names = pmdeg.feature_names()
    assert len(names) == 64
    assert names[3] == "t1_4"
    t, p = pmdeg.generate_curve("N", 3)
    f = pmdeg.extract_features(t, p)
    assert f.shape == (64,)
    assert np.all(np.isfinite(f))
    t2, p2 = pmdeg.generate_curve("N", 3)
    assert np.array_equal(p, p2)


def test_bad_input_raises():
    with pytest.raises(pmdeg.DataError):
        pmdeg.extract_features(np.array([0.0, 0.0]), np.array([1.0, 1.0]))
    with pytest.raises(pmdeg.DataError):
        pmdeg.generate_curve("Q9", 1)


def test_selection_and_svm():
    rng = np.random.default_rng(0)
    fault = rng.normal(size=(30, 3))
    fault[:, 0] += 4.0
    normal = rng.normal(size=(30, 3))
    assert pmdeg.select_features(fault, normal) == [0]

    X = np.vstack([rng.normal(c, 0.1, size=(10, 2)) for c in (0.0, 2.0, 4.0)])
    y = [1] * 10 + [2] * 10 + [3] * 10
    model = pmdeg.train_svm(X, y)
    assert model.classes == [1, 2, 3]
    assert model.predict(X) == y


def test_run_synth(tmp_path):
    rc = pmdeg.run("synth", tmp_path, seed=2, settings={"synth.counts": "N=3,F1=2"})
    assert rc == 0
    report = json.loads((tmp_path / "synth_report.json").read_text())
    assert (tmp_path / "manifest.csv").exists()
    assert report["seed"] == 2
    with pytest.raises(pmdeg.ConfigError):
        pmdeg.run("synth", tmp_path, settings={"no.such": "1"})
