"""Training loop: adaptive-moment optimization with early stopping.

The dataset is split deterministically into train/validation/test parts
(80/10/10 by default).  Each epoch minimizes the mean squared velocity
error; after each epoch the validation error decides early stopping:
when it has not improved by more than ``min_delta`` for ``patience``
consecutive epochs, training stops and the parameters of the best
validation epoch are exported.  On datasets too small to hold a
validation part, the training error takes that role.

Outputs, all under the run directory:

    weights.usds     best-epoch parameters in the binary weight format
    train_loss.txt   two columns per line: epoch index, training MSE
    val_loss.txt     two columns: epoch index, validation MSE (if any)
    manifest.ini     everything needed to reproduce the run
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from torch.utils.data import DataLoader, Dataset

from .dataset import (SDF_NORMALIZER, PairSample, load_dataset, sample_tensors,
                      split_indices)
from .errors import ConfigError, TrainingError
from .model import (CONSTRAINT_MODES, SubdomainNet, export_layers, mse_loss,
                    predict)
from .specs import PRESETS, parameter_count
from .usds import save_weights

__all__ = ["TrainConfig", "TrainResult", "train"]


@dataclass
class TrainConfig:
    """Hyperparameters of one training run (canonical defaults)."""

    learning_rate: float = 1e-4
    batch_size: int = 64
    eval_batch_size: int = 32
    split: tuple[float, float, float] = (0.8, 0.1, 0.1)
    patience: int = 50
    min_delta: float = 1e-7
    max_epochs: int = 400
    sdf_normalizer: float = SDF_NORMALIZER
    constraint: str = "flow-rate-conserving"
    xi: int | None = None
    preset: str = "default"
    seed: int = 0
    normalize_velocity: bool = False
    device: str = "cpu"
    workers: int = 0

    def validate(self) -> None:
        if abs(sum(self.split) - 1.0) > 1e-9 or any(f < 0 for f in self.split):
            raise ConfigError(f"split fractions must sum to 1, got {self.split}")
        if not self.patience < self.max_epochs:
            raise ConfigError(
                f"patience {self.patience} must be below "
                f"max_epochs {self.max_epochs}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning rate must be positive, "
                              f"got {self.learning_rate}")
        if self.batch_size < 1 or self.eval_batch_size < 1:
            raise ConfigError("batch sizes must be at least 1")
        if self.min_delta < 0:
            raise ConfigError(f"min_delta must be non-negative, "
                              f"got {self.min_delta}")
        if self.max_epochs < 1:
            raise ConfigError("max_epochs must be at least 1")
        if self.constraint not in CONSTRAINT_MODES:
            raise ConfigError(f"constraint mode must be one of "
                              f"{CONSTRAINT_MODES}, got {self.constraint!r}")
        if self.preset not in PRESETS:
            raise ConfigError(f"unknown architecture preset {self.preset!r}; "
                              f"available: {tuple(PRESETS)}")
        if self.sdf_normalizer <= 0:
            raise ConfigError("sdf_normalizer must be positive")
        if self.xi is not None and self.xi < 1:
            raise ConfigError(f"xi must be positive, got {self.xi}")


@dataclass
class TrainResult:
    """Outcome of a run: curves, chosen epoch, and artifact paths."""

    weight_path: str
    manifest_path: str
    epochs_run: int
    best_epoch: int
    best_monitor_mse: float
    train_curve: list[float] = field(default_factory=list)
    val_curve: list[float] = field(default_factory=list)
    test_mse: float | None = None
    stopped_early: bool = False


class _PairTensors(Dataset):
    def __init__(self, samples: list[PairSample], normalize_velocity: bool):
        self.samples = samples
        self.normalize_velocity = normalize_velocity

    def __len__(self) -> int:
        return len(self.samples)

    def __getitem__(self, idx: int) -> dict:
        s = self.samples[idx]
        x, y, mask, q_inlet, dy = sample_tensors(s, self.normalize_velocity)
        return {
            "x": torch.from_numpy(x),
            "y": torch.from_numpy(y),
            "mask": torch.from_numpy(mask),
            "q_inlet": torch.tensor(q_inlet, dtype=torch.float32),
            "dy": torch.tensor(s.dy, dtype=torch.float32),
            "xi": torch.tensor(s.xi),
        }


def _epoch_mse(net: SubdomainNet, loader: DataLoader, mode: str,
               device: str) -> float:
    """Sample-weighted mean of the per-image MSE over a whole loader."""
    total, count = 0.0, 0
    net.eval()
    with torch.no_grad():
        for batch in loader:
            batch = {k: v.to(device) for k, v in batch.items()}
            loss = mse_loss(predict(net, batch, mode), batch["y"])
            n = batch["y"].shape[0]
            total += float(loss) * n
            count += n
    return total / count


def _write_curve(path: Path, values: list[float]) -> None:
    with open(path, "w") as fh:
        for epoch, value in enumerate(values, start=1):
            fh.write(f"{epoch} {value:.10e}\n")


def _write_manifest(path: Path, cfg: TrainConfig, data_dir: str,
                    sizes: tuple[int, int, int], shape: tuple[int, int],
                    xi: int, params: int, result: TrainResult,
                    monitor: str) -> None:
    parser = configparser.ConfigParser(interpolation=None)
    parser["run"] = {
        "data_dir": data_dir,
        "pairs": str(sum(sizes)),
        "train_size": str(sizes[0]),
        "val_size": str(sizes[1]),
        "test_size": str(sizes[2]),
        "height": str(shape[0]),
        "width": str(shape[1]),
        "xi": str(xi),
        "preset": cfg.preset,
        "parameters": str(params),
        "constraint": cfg.constraint,
        "seed": str(cfg.seed),
        "torch_version": torch.__version__,
        "initialization": ("framework default: kaiming-uniform(a=sqrt(5)) "
                           "weights, uniform fan-in bias"),
        "optimizer": "adam (betas 0.9/0.999, eps 1e-8, default settings)",
        "learning_rate": repr(cfg.learning_rate),
        "batch_size": str(cfg.batch_size),
        "eval_batch_size": str(cfg.eval_batch_size),
        "patience": str(cfg.patience),
        "min_delta": repr(cfg.min_delta),
        "max_epochs": str(cfg.max_epochs),
        "sdf_normalizer": repr(cfg.sdf_normalizer),
        "normalize_velocity": str(cfg.normalize_velocity).lower(),
        "device": cfg.device,
    }
    parser["result"] = {
        "epochs_run": str(result.epochs_run),
        "best_epoch": str(result.best_epoch),
        "monitor": monitor,
        "best_monitor_mse": repr(result.best_monitor_mse),
        "stopped_early": str(result.stopped_early).lower(),
        "test_mse": "" if result.test_mse is None else repr(result.test_mse),
    }
    with open(path, "w") as fh:
        parser.write(fh)


def train(data_dir: str, out_dir: str, cfg: TrainConfig | None = None,
          log=None) -> TrainResult:
    """Train on the pairs under ``data_dir`` and export the best weights.

    ``log``, when given, receives one progress line per epoch.
    """
    cfg = cfg or TrainConfig()
    cfg.validate()
    say = log or (lambda line: None)

    samples = load_dataset(data_dir)
    height, width, xi = samples[0].height, samples[0].width, samples[0].xi
    if cfg.xi is not None and cfg.xi != xi:
        raise ConfigError(f"config xi {cfg.xi} does not match dataset xi {xi}")

    arch = PRESETS[cfg.preset](height, width)
    params = parameter_count(arch.layers())

    torch.manual_seed(cfg.seed)
    net = SubdomainNet(arch).to(cfg.device)
    optimizer = torch.optim.Adam(net.parameters(), lr=cfg.learning_rate)

    idx_train, idx_val, idx_test = split_indices(len(samples), cfg.split,
                                                 cfg.seed)
    parts = tuple(_PairTensors([samples[i] for i in idx], cfg.normalize_velocity)
                  for idx in (idx_train, idx_val, idx_test))
    shuffler = torch.Generator().manual_seed(cfg.seed)
    train_loader = DataLoader(parts[0], batch_size=cfg.batch_size, shuffle=True,
                              generator=shuffler, num_workers=cfg.workers)
    val_loader = DataLoader(parts[1], batch_size=cfg.eval_batch_size,
                            num_workers=cfg.workers) if len(parts[1]) else None
    test_loader = DataLoader(parts[2], batch_size=cfg.eval_batch_size,
                             num_workers=cfg.workers) if len(parts[2]) else None
    monitor = "validation" if val_loader is not None else "training"

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    weight_path = out / "weights.usds"

    train_curve: list[float] = []
    val_curve: list[float] = []
    best_value = math.inf
    best_epoch = 0
    best_state = None
    since_best = 0
    stopped_early = False
    epochs_run = 0

    for epoch in range(1, cfg.max_epochs + 1):
        epochs_run = epoch
        net.train()
        total, count = 0.0, 0
        for batch in train_loader:
            batch = {k: v.to(cfg.device) for k, v in batch.items()}
            optimizer.zero_grad()
            loss = mse_loss(predict(net, batch, cfg.constraint), batch["y"])
            if not torch.isfinite(loss):
                raise TrainingError(f"non-finite training loss at epoch {epoch}")
            loss.backward()
            optimizer.step()
            n = batch["y"].shape[0]
            total += loss.item() * n
            count += n
        train_mse = total / count
        train_curve.append(train_mse)

        if val_loader is not None:
            val_mse = _epoch_mse(net, val_loader, cfg.constraint, cfg.device)
            if not math.isfinite(val_mse):
                raise TrainingError(f"non-finite validation loss at epoch {epoch}")
            val_curve.append(val_mse)
            monitored = val_mse
            say(f"epoch {epoch:4d}  train {train_mse:.6e}  val {val_mse:.6e}")
        else:
            monitored = train_mse
            say(f"epoch {epoch:4d}  train {train_mse:.6e}")

        if monitored < best_value - cfg.min_delta:
            best_value = monitored
            best_epoch = epoch
            best_state = {k: v.detach().clone()
                          for k, v in net.state_dict().items()}
            since_best = 0
        else:
            since_best += 1
            if since_best >= cfg.patience:
                stopped_early = True
                break

    if best_state is None:  # unreachable: epoch 1 always improves on +inf
        raise TrainingError("no finite epoch to export")
    net.load_state_dict(best_state)

    result = TrainResult(str(weight_path), str(out / "manifest.ini"),
                         epochs_run, best_epoch, best_value,
                         train_curve, val_curve, None, stopped_early)
    if test_loader is not None:
        result.test_mse = _epoch_mse(net, test_loader, cfg.constraint,
                                     cfg.device)

    save_weights(str(weight_path), arch, export_layers(net))
    _write_curve(out / "train_loss.txt", train_curve)
    if val_curve:
        _write_curve(out / "val_loss.txt", val_curve)
    _write_manifest(out / "manifest.ini", cfg, str(data_dir),
                    (len(parts[0]), len(parts[1]), len(parts[2])),
                    (height, width), xi, params, result, monitor)
    say(f"best epoch {best_epoch} ({monitor} MSE {best_value:.6e}); "
        f"weights in {weight_path}")
    return result
