"""Training loop: Adam at 1e-3 for 90 epochs, class-weighted sampling, CSV log."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from torch.utils.data import DataLoader, TensorDataset, WeightedRandomSampler

from .dataset import TrainingSample
from .model import SigmaClassifier, new_model


@dataclass
class EpochStats:
    epoch: int
    loss: float
    train_accuracy: float
    val_accuracy: float
    val_approximate: float


def _to_tensors(samples: list[TrainingSample]) -> TensorDataset:
    tiles = torch.from_numpy(np.stack([s.tile for s in samples])[:, None, :, :]).float()
    labels = torch.tensor([s.label for s in samples], dtype=torch.long)
    return TensorDataset(tiles, labels)


def _accuracy(model: SigmaClassifier, loader: DataLoader) -> tuple[float, float]:
    model.eval()
    exact = approx = total = 0
    with torch.no_grad():
        for tiles, labels in loader:
            pred = model(tiles).argmax(dim=1)
            exact += int((pred == labels).sum())
            approx += int(((pred - labels).abs() <= 1).sum())
            total += len(labels)
    if total == 0:
        return 0.0, 0.0
    return exact / total, approx / total


def train_classifier(
    train_samples: list[TrainingSample],
    val_samples: list[TrainingSample],
    classes: int,
    epochs: int = 90,
    lr: float = 1e-3,
    batch_size: int = 32,
    seed: int = 0,
    log_path: str | Path | None = None,
) -> tuple[SigmaClassifier, list[EpochStats]]:
    """Train the pinned classifier; returns the model and per-epoch stats.

    Sampling weights are inverse class frequencies, so sparse classes (the
    clean-clean small-sigma augmentations in particular) are not drowned out.
    """
    if classes < 2:
        raise ValueError("need at least two classes")
    present = {s.label for s in train_samples}
    if max(present) >= classes:
        raise ValueError("a training label exceeds the class count")
    if len(present) < 2:
        raise ValueError("training data covers fewer than two classes")

    torch.manual_seed(seed)
    model = new_model(classes, seed=seed)
    data = _to_tensors(train_samples)
    counts = np.bincount([s.label for s in train_samples], minlength=classes)
    weights = torch.tensor(
        [1.0 / counts[s.label] for s in train_samples], dtype=torch.double
    )
    sampler = WeightedRandomSampler(
        weights, num_samples=len(train_samples), replacement=True,
        generator=torch.Generator().manual_seed(seed),
    )
    loader = DataLoader(data, batch_size=batch_size, sampler=sampler)
    train_eval = DataLoader(data, batch_size=256)
    val_eval = DataLoader(_to_tensors(val_samples), batch_size=256) if val_samples else None

    optimizer = torch.optim.Adam(model.parameters(), lr=lr)
    criterion = torch.nn.CrossEntropyLoss()
    history: list[EpochStats] = []
    for epoch in range(epochs):
        model.train()
        running = 0.0
        for tiles, labels in loader:
            optimizer.zero_grad()
            loss = criterion(model(tiles), labels)
            loss.backward()
            optimizer.step()
            running += float(loss.detach()) * len(labels)
        train_acc, _ = _accuracy(model, train_eval)
        if val_eval is not None:
            val_acc, val_approx = _accuracy(model, val_eval)
        else:
            val_acc = val_approx = float("nan")
        history.append(
            EpochStats(
                epoch=epoch,
                loss=running / len(train_samples),
                train_accuracy=train_acc,
                val_accuracy=val_acc,
                val_approximate=val_approx,
            )
        )
    if log_path is not None:
        write_log(history, log_path)
    return model, history


def write_log(history: list[EpochStats], path: str | Path) -> None:
    """Per-epoch training log as CSV."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "loss", "train_accuracy", "val_accuracy", "val_approximate"])
        for row in history:
            writer.writerow(
                [row.epoch, f"{row.loss:.6f}", f"{row.train_accuracy:.4f}",
                 f"{row.val_accuracy:.4f}", f"{row.val_approximate:.4f}"]
            )


def evaluate(model: SigmaClassifier, samples: list[TrainingSample]) -> tuple[float, float]:
    """(exact, within-one-class) accuracy on a sample list."""
    return _accuracy(model, DataLoader(_to_tensors(samples), batch_size=256))
