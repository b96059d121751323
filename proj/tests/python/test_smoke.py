"""Smoke tests for the python bindings."""

import math

import numpy as np
import pytest

try:
    import pairnet as pn
except ImportError:
    import _pairnet as pn


def test_coupling_and_counts():
    assert pn.classifier_count(16) == 120
    assert pn.classifier_count(2) == 1
    assert pn.coupling_weight(1, 1, 2, 3) == 1
    assert pn.coupling_weight(3, 1, 3, 3) == -1
    assert pn.coupling_weight(2, 1, 3, 3) == 0
    with pytest.raises(pn.StructuralError):
        pn.classifier_count(1)


def test_spectrum_and_features():
    rate = 100.0
    t = np.arange(1000) / rate
    tone = np.sin(2 * math.pi * 5.0 * t)
    freqs, powers = pn.power_spectrum(tone, rate)
    assert abs(sum(powers) - tone.var()) < 1e-9
    peak = freqs[int(np.argmax(powers))]
    assert peak == pytest.approx(5.0)

    names = pn.feature_names()
    assert len(names) == 72
    values = pn.extract_features(tone, np.zeros(1000), rate)
    assert len(values) == 72
    theta_rel = values[names.index("ch1_theta_rel_power")]
    assert theta_rel > 0.99


def test_train_predict_roundtrip(tmp_path):
    spec = pn.SyntheticSpec()
    spec.q = 3
    spec.records_per_class = 3
    spec.segments_per_record = 4
    spec.overlap = 0.02
    spec.seed = 7
    ds = pn.synth_dataset(spec, test_fraction=1 / 3)
    assert ds.n_rows == 36

    cfg = pn.TrainConfig()
    cfg.seed = 11
    model, info = pn.train_model(ds, 3, cfg)
    assert model.q == 3
    assert model.n_classifiers == 3
    assert len(info) == 3

    train_acc = pn.segment_accuracy(model, ds, pn.Partition.train)
    test_acc = pn.segment_accuracy(model, ds, pn.Partition.test)
    assert train_acc >= 0.95
    assert test_acc >= 0.9
    assert pn.record_accuracy(model, ds, pn.Partition.test) >= test_acc

    decisions = pn.record_decisions(model, ds, pn.Partition.test)
    for d in decisions:
        assert d.probability == pytest.approx(max(d.per_class_fractions))
        assert sum(d.per_class_fractions) == pytest.approx(1.0)

    path = tmp_path / "model.json"
    model.save(str(path))
    back = pn.Model.load(str(path))
    assert back.to_json() == model.to_json()
    row = [0.0] * 72
    assert back.predict(row) == model.predict(row)


def test_group_scores_identity():
    spec = pn.SyntheticSpec()
    spec.q = 4
    spec.records_per_class = 2
    spec.segments_per_record = 2
    spec.overlap = 0.0
    spec.seed = 3
    ds = pn.synth_dataset(spec, test_fraction=0)
    model, _ = pn.train_model(ds, 4, pn.TrainConfig())
    gs = model.group_scores([0.5] * 72)
    assert sum(gs.votes) == pn.classifier_count(4)
    for score, votes in zip(gs.scores, gs.votes):
        assert score == 2 * votes - 3
    assert gs.winner == 1 + int(np.argmax(gs.scores))


def test_baselines():
    spec = pn.SyntheticSpec()
    spec.q = 4
    spec.records_per_class = 2
    spec.segments_per_record = 3
    spec.overlap = 0.05
    spec.seed = 5
    ds = pn.synth_dataset(spec, test_fraction=0)
    ova = pn.train_one_vs_all(ds, 4, pn.TrainConfig())
    assert ova.n_units == 4
    hier = pn.train_hierarchical(ds, 4, pn.TrainConfig())
    assert hier.n_nodes == 3
    assert pn.one_vs_all_accuracy(ova, ds, pn.Partition.train) > 0.5
    assert pn.hierarchical_accuracy(hier, ds, pn.Partition.train) > 0.5
