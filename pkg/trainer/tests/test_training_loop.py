"""End-to-end behavior of the optimization loop and its artifacts."""

from __future__ import annotations

import configparser

import numpy as np
import pytest

torch = pytest.importorskip("torch")
stenotrain = pytest.importorskip("stenotrain")

from stenotrain import (ConfigError, FLOW_RATE_GUARD, SubdomainNet,
                        TrainConfig, TrainingError, flow_rates, load_dataset,
                        load_into_network, load_pair, load_weights, mse_loss,
                        predict, sample_tensors, split_indices,
                        tiny_architecture, train)


def _eval_batch(sample):
    x, y, mask, q_inlet, dy = sample_tensors(sample)
    return {
        "x": torch.from_numpy(x)[None],
        "y": torch.from_numpy(y)[None],
        "mask": torch.from_numpy(mask)[None],
        "q_inlet": torch.tensor([q_inlet], dtype=torch.float32),
        "dy": torch.tensor([sample.dy], dtype=torch.float32),
        "xi": torch.tensor([sample.xi]),
    }


def test_single_pair_overfit_learns_the_field(single_pair, tmp_path):
    sample = load_pair(single_pair)
    _, y, _, _, _ = sample_tensors(sample, normalize_velocity=True)
    variance = float(np.var(y))

    cfg = TrainConfig(learning_rate=1e-2, batch_size=4, eval_batch_size=4,
                      split=(1.0, 0.0, 0.0), patience=399, max_epochs=400,
                      constraint="data-driven", preset="tiny", seed=0,
                      normalize_velocity=True)
    res = train(str(single_pair), str(tmp_path / "run"), cfg)

    assert res.best_monitor_mse < 0.1 * variance
    assert res.train_curve[0] / res.best_monitor_mse > 20
    assert res.val_curve == [] and res.test_mse is None
    assert len(res.train_curve) == res.epochs_run

    out = tmp_path / "run"
    assert (out / "weights.usds").is_file()
    curve_lines = (out / "train_loss.txt").read_text().splitlines()
    assert len(curve_lines) == res.epochs_run
    assert curve_lines[0].split()[0] == "1"
    assert not (out / "val_loss.txt").exists()

    manifest = configparser.ConfigParser(interpolation=None)
    manifest.read(out / "manifest.ini")
    assert manifest["run"]["preset"] == "tiny"
    assert manifest["result"]["monitor"] == "training"
    assert int(manifest["result"]["best_epoch"]) == res.best_epoch


def test_early_stopping_bounds_the_run(pair_root, tmp_path):
    cfg = TrainConfig(learning_rate=1e-12, patience=3, max_epochs=50,
                      preset="tiny", seed=1)
    res = train(str(pair_root), str(tmp_path / "run"), cfg)

    assert res.stopped_early
    assert res.epochs_run - res.best_epoch == cfg.patience
    assert len(res.val_curve) == res.epochs_run
    val_lines = (tmp_path / "run" / "val_loss.txt").read_text().splitlines()
    assert len(val_lines) == res.epochs_run

    manifest = configparser.ConfigParser(interpolation=None)
    manifest.read(tmp_path / "run" / "manifest.ini")
    assert manifest["result"]["monitor"] == "validation"
    assert manifest["result"]["stopped_early"] == "true"
    assert int(manifest["run"]["val_size"]) == len(
        split_indices(58, cfg.split, cfg.seed)[1])


def test_best_epoch_weights_are_the_ones_exported(pair_root, tmp_path):
    # a tiny training part driven hard: the training error falls while the
    # validation error wanders, so the best epoch precedes the last one
    cfg = TrainConfig(learning_rate=3e-2, split=(0.1, 0.8, 0.1), patience=4,
                      max_epochs=30, preset="tiny", seed=0)
    res = train(str(pair_root / "geom_0000"), str(tmp_path / "run"), cfg)

    assert res.stopped_early and res.best_epoch < res.epochs_run
    assert res.val_curve[res.best_epoch - 1] == res.best_monitor_mse

    samples = load_dataset(str(pair_root / "geom_0000"))
    _, idx_val, _ = split_indices(len(samples), cfg.split, cfg.seed)
    net = SubdomainNet(tiny_architecture(32, 64))
    load_into_network(net, load_weights(res.weight_path))
    net.eval()
    with torch.no_grad():
        values = [mse_loss(predict(net, _eval_batch(samples[i]),
                                   cfg.constraint),
                           _eval_batch(samples[i])["y"]).item()
                  for i in idx_val]
    reloaded = sum(values) / len(values)
    assert reloaded == pytest.approx(res.best_monitor_mse, rel=1e-5)


def test_constrained_training_conserves_flow(pair_root, tmp_path):
    cfg = TrainConfig(learning_rate=1e-3, patience=4, max_epochs=5,
                      preset="tiny", seed=2)
    assert cfg.constraint == "flow-rate-conserving"
    res = train(str(pair_root), str(tmp_path / "run"), cfg)

    net = SubdomainNet(tiny_architecture(32, 64))
    load_into_network(net, load_weights(res.weight_path))
    net.eval()
    sample = load_dataset(str(pair_root))[0]
    batch = _eval_batch(sample)
    with torch.no_grad():
        out = predict(net, batch, cfg.constraint)
        q = flow_rates(out[:, 0], batch["dy"])
    flagged = q.abs() < FLOW_RATE_GUARD * batch["q_inlet"][:, None]
    assert not bool(flagged.any())
    rel = (q - batch["q_inlet"][:, None]).abs() / batch["q_inlet"][:, None]
    assert float(rel.max()) <= 1e-5


def test_same_seed_reproduces_the_run_exactly(pair_root, tmp_path):
    cfg = TrainConfig(learning_rate=1e-3, patience=2, max_epochs=3,
                      preset="tiny", seed=7)
    first = train(str(pair_root), str(tmp_path / "a"), cfg)
    second = train(str(pair_root), str(tmp_path / "b"), cfg)
    assert first.train_curve == second.train_curve
    assert first.val_curve == second.val_curve
    assert ((tmp_path / "a" / "weights.usds").read_bytes()
            == (tmp_path / "b" / "weights.usds").read_bytes())

    other = train(str(pair_root), str(tmp_path / "c"),
                  TrainConfig(learning_rate=1e-3, patience=2, max_epochs=3,
                              preset="tiny", seed=8))
    assert other.train_curve != first.train_curve


def test_non_finite_loss_aborts_with_the_epoch(pair_root, tmp_path):
    cfg = TrainConfig(learning_rate=1e18, patience=2, max_epochs=5,
                      preset="tiny", seed=0)
    with pytest.raises(TrainingError, match="epoch"):
        train(str(pair_root), str(tmp_path / "run"), cfg)


def test_mismatched_xi_is_rejected(pair_root, tmp_path):
    cfg = TrainConfig(xi=7, patience=1, max_epochs=2, preset="tiny")
    with pytest.raises(ConfigError, match="xi"):
        train(str(pair_root), str(tmp_path / "run"), cfg)
