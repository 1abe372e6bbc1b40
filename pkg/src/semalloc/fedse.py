"""Toy federated training loop for semantic-extraction models.

Each communication group owns an edge server that fine-tunes a linear
least-squares surrogate of its SE model on the group's knowledge set.
One round runs the six orchestration steps in order:

1. local update at every edge server, then sample-weighted aggregation
2. broadcast of the global model to every group
3-5. devices use the model, label fresh samples (with label noise) and upload
6. edge servers fold the uploads into their knowledge sets
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class FedConfig:
    epochs: int = 1
    lr: float = 0.1
    upload_batch: int = 8
    label_noise: float = 0.0

    def errors(self) -> list[str]:
        errs = []
        if not isinstance(self.epochs, int) or self.epochs < 0:
            errs.append("epochs: must be a non-negative integer")
        if self.lr < 0:
            errs.append("lr: must be >= 0")
        if not isinstance(self.upload_batch, int) or self.upload_batch < 0:
            errs.append("upload_batch: must be a non-negative integer")
        if self.label_noise < 0:
            errs.append("label_noise: must be >= 0")
        return errs


@dataclass(frozen=True)
class CommGroup:
    group_id: int
    server_id: int
    device_ids: tuple
    inputs: np.ndarray  # (m, p)
    targets: np.ndarray  # (m,)
    theta: np.ndarray  # (p,)
    version: int = 0

    def __post_init__(self):
        if not self.device_ids:
            raise ValueError("a communication group needs at least one device")

    @property
    def num_samples(self) -> int:
        return len(self.targets)


@dataclass(frozen=True)
class RoundLog:
    round: int
    loss_before: tuple
    loss_after: tuple
    global_loss: float
    uploads: int
    versions: tuple = field(default=())


def squared_loss(theta: np.ndarray, inputs: np.ndarray, targets: np.ndarray) -> float:
    r = inputs @ theta - targets
    return float(np.mean(r * r))


def local_update(group: CommGroup, epochs: int, lr: float) -> tuple[CommGroup, float, float]:
    """Full-batch gradient descent on mean squared error.

    Returns the updated group and the loss before and after.
    """
    if group.num_samples == 0:
        raise ValueError(f"group {group.group_id} has an empty dataset")
    if lr < 0:
        raise ValueError("lr must be >= 0")
    x, y = group.inputs, group.targets
    theta = group.theta.copy()
    before = squared_loss(theta, x, y)
    for _ in range(epochs):
        theta = theta - lr * (2.0 / len(y)) * (x.T @ (x @ theta - y))
    return replace(group, theta=theta), before, squared_loss(theta, x, y)


def federated_aggregate(models: Sequence[tuple[np.ndarray, int]]) -> np.ndarray:
    """Sample-count-weighted average of parameter vectors.

    Written as ``theta_0 + sum_i w_i (theta_i - theta_0)`` so a single model,
    or a set of identical ones, comes back bit-for-bit.
    """
    if not models:
        raise ValueError("nothing to aggregate")
    thetas = [np.asarray(t, dtype=float) for t, _ in models]
    counts = np.array([c for _, c in models], dtype=float)
    if any(t.shape != thetas[0].shape for t in thetas):
        raise ValueError("parameter dimensions differ")
    if np.any(counts <= 0):
        raise ValueError("sample counts must be positive")
    weights = counts / counts.sum()
    anchor = thetas[0]
    out = anchor.copy()
    for w, t in zip(weights, thetas):
        out = out + w * (t - anchor)
    return out


def broadcast(theta: np.ndarray, groups: Sequence[CommGroup]) -> list[CommGroup]:
    theta = np.asarray(theta, dtype=float)
    for g in groups:
        if g.theta.shape != theta.shape:
            raise ValueError(f"group {g.group_id}: dimension mismatch")
    return [replace(g, theta=theta.copy()) for g in groups]


def label_and_upload(group: CommGroup, rng: np.random.Generator, label_noise: float,
                     target_theta: np.ndarray, batch: int) -> CommGroup:
    """Devices label ``batch`` fresh samples and upload them to the edge server."""
    if label_noise < 0:
        raise ValueError("label noise must be >= 0")
    p = group.inputs.shape[1]
    x = rng.standard_normal((batch, p))
    y = x @ target_theta
    if label_noise > 0:
        y = y + label_noise * rng.standard_normal(batch)
    return replace(
        group,
        inputs=np.vstack([group.inputs, x]),
        targets=np.concatenate([group.targets, y]),
        version=group.version + 1,
    )


def make_groups(num_groups: int, rng: np.random.Generator, dim: int = 4, samples: int = 32,
                devices_per_group: int = 3, label_noise: float = 0.0):
    """Synthetic well-conditioned linear data sharing one generating model.

    Returns ``(groups, target_theta)``.
    """
    target = rng.standard_normal(dim)
    groups = []
    for g in range(num_groups):
        x = rng.standard_normal((samples, dim))
        y = x @ target + label_noise * rng.standard_normal(samples)
        devices = tuple(range(g * devices_per_group, (g + 1) * devices_per_group))
        groups.append(CommGroup(g, g, devices, x, y, np.zeros(dim)))
    return groups, target


def global_loss(theta: np.ndarray, groups: Sequence[CommGroup]) -> float:
    x = np.vstack([g.inputs for g in groups])
    y = np.concatenate([g.targets for g in groups])
    return squared_loss(theta, x, y)


def run_rounds(groups: Sequence[CommGroup], num_rounds: int, config: FedConfig,
               rng: np.random.Generator, target_theta: np.ndarray) -> tuple[list[CommGroup], list[RoundLog]]:
    """Run ``num_rounds`` synchronous rounds; groups are processed in id order."""
    if num_rounds < 1:
        raise ValueError("num_rounds must be >= 1")
    errs = config.errors()
    if errs:
        raise ValueError("; ".join(errs))
    groups = sorted(groups, key=lambda g: g.group_id)
    logs = []
    for r in range(num_rounds):
        # step 1
        updated, before, after = [], [], []
        for g in groups:
            g2, lb, la = local_update(g, config.epochs, config.lr)
            updated.append(g2)
            before.append(lb)
            after.append(la)
        theta = federated_aggregate([(g.theta, g.num_samples) for g in updated])
        # step 2
        groups = broadcast(theta, updated)
        # steps 3-6
        groups = [label_and_upload(g, rng, config.label_noise, target_theta, config.upload_batch)
                  for g in groups]
        logs.append(RoundLog(r, tuple(before), tuple(after), global_loss(theta, groups),
                             config.upload_batch * len(groups), tuple(g.version for g in groups)))
    return groups, logs
