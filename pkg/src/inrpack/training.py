"""Joint training of a weight bank against M images through fixed combinations.

Every epoch evaluates all M combined-weight losses on the full pixel grid,
pulls the per-image gradients back onto the N weight sets, and applies one
optimizer step. Runs are deterministic given the config seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .imaging import coord_grid
from .siren import NetworkArch, forward, init_weights, loss_and_grad
from .weights import CombinerSpec, WeightBank, aggregate_grads, combine

__all__ = [
    "TrainConfig",
    "TrainHistory",
    "StepMetrics",
    "TrainingDivergedError",
    "total_loss",
    "train_step",
    "train",
    "make_optimizer",
]


class TrainingDivergedError(RuntimeError):
    """Loss or gradient went non-finite, or the total loss blew up."""


@dataclass
class TrainConfig:
    epochs: int
    optimizer: str = "adam"  # "adam" or "plain-gd"
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    log_every: int = 100
    identical_init: bool = False  # start every weight set from the same draw
    divergence_factor: float = 1e6

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.optimizer not in ("adam", "plain-gd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.log_every < 1:
            raise ValueError("log_every must be >= 1")


@dataclass
class StepMetrics:
    epoch: int
    total_loss: float
    per_image_loss: list
    grad_norms: list  # per combined image, before aggregation


@dataclass
class TrainHistory:
    """Per-logged-epoch training record; grad_norm_max is the running maximum
    of each combined image's gradient norm (an empirical uniform bound)."""

    epochs: list = field(default_factory=list)
    total_loss: list = field(default_factory=list)
    per_image_loss: list = field(default_factory=list)
    per_image_psnr: list = field(default_factory=list)
    grad_norm_max: list = field(default_factory=list)

    def append(self, epoch, total, losses, psnrs, grad_max):
        self.epochs.append(int(epoch))
        self.total_loss.append(float(total))
        self.per_image_loss.append([float(v) for v in losses])
        self.per_image_psnr.append([float(v) for v in psnrs])
        self.grad_norm_max.append([float(v) for v in grad_max])

    def final_psnr(self) -> list:
        return self.per_image_psnr[-1] if self.per_image_psnr else []

    def to_jsonl(self) -> str:
        lines = []
        for k in range(len(self.epochs)):
            lines.append(
                json.dumps(
                    {
                        "epoch": self.epochs[k],
                        "total_loss": self.total_loss[k],
                        "per_image_loss": self.per_image_loss[k],
                        "per_image_psnr": self.per_image_psnr[k],
                        "grad_norm_max": self.grad_norm_max[k],
                    }
                )
            )
        return "\n".join(lines) + ("\n" if lines else "")

    def write_jsonl(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_jsonl())


class PlainGD:
    def __init__(self, learning_rate: float):
        self.learning_rate = learning_rate

    def update(self, matrix: np.ndarray, grads: np.ndarray) -> None:
        matrix -= self.learning_rate * grads


class Adam:
    def __init__(self, learning_rate, beta1=0.9, beta2=0.999, eps=1e-8):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step = 0
        self.m = None
        self.v = None

    def update(self, matrix: np.ndarray, grads: np.ndarray) -> None:
        if self.m is None:
            self.m = np.zeros_like(matrix)
            self.v = np.zeros_like(matrix)
        self.step += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grads
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grads * grads
        m_hat = self.m / (1.0 - self.beta1 ** self.step)
        v_hat = self.v / (1.0 - self.beta2 ** self.step)
        matrix -= self.learning_rate * m_hat / (np.sqrt(v_hat) + self.eps)


def make_optimizer(config: TrainConfig):
    if config.optimizer == "adam":
        return Adam(config.learning_rate, config.beta1, config.beta2, config.eps)
    return PlainGD(config.learning_rate)


def _signed_targets(images):
    return [img.to_signed().pixels() for img in images]


def _check_setup(bank, spec, images):
    if spec.n_sets != len(bank):
        raise ValueError(f"combiner expects {spec.n_sets} weight sets, bank has {len(bank)}")
    if spec.n_images != len(images):
        raise ValueError(f"combiner covers {spec.n_images} images, got {len(images)}")
    dims = images[0].dims
    for i, img in enumerate(images):
        if img.dims != dims:
            raise ValueError(f"image {i} dims {img.dims} differ from {dims}")
    if dims[2] != bank.arch.output_dim:
        raise ValueError(
            f"images have {dims[2]} channels but the network outputs {bank.arch.output_dim}"
        )


def total_loss(bank: WeightBank, spec: CombinerSpec, images, coords):
    """Weighted total loss and the per-image losses at the current bank."""
    _check_setup(bank, spec, images)
    targets = _signed_targets(images)
    per_image = []
    for i in range(spec.n_images):
        w = combine(bank, spec.alpha[i])
        resid = forward(w, coords) - targets[i]
        per_image.append(float(np.mean(resid * resid)))
    total = float(np.dot(spec.gamma, per_image))
    return total, per_image


def _eval_losses_psnr(bank, spec, targets, coords):
    """Forward-only evaluation: per-image loss and unit-range PSNR."""
    losses = []
    psnrs = []
    for i in range(spec.n_images):
        w = combine(bank, spec.alpha[i])
        pred = forward(w, coords)
        resid = pred - targets[i]
        losses.append(float(np.mean(resid * resid)))
        unit_err = np.clip((pred + 1.0) / 2.0, 0.0, 1.0) - (targets[i] + 1.0) / 2.0
        mse = float(np.mean(unit_err * unit_err))
        psnrs.append(math.inf if mse == 0.0 else 10.0 * math.log10(1.0 / mse))
    total = float(np.dot(spec.gamma, losses))
    return total, losses, psnrs


def train_step(bank: WeightBank, spec: CombinerSpec, images, coords, optimizer, epoch: int = 0):
    """One joint update: M gradient evaluations at the combined weights,
    chain-rule aggregation, one optimizer step on every weight set in place."""
    _check_setup(bank, spec, images)
    targets = _signed_targets(images)
    grads = []
    losses = []
    norms = []
    for i in range(spec.n_images):
        w = combine(bank, spec.alpha[i])
        loss, grad = loss_and_grad(w, coords, targets[i])
        if not math.isfinite(loss) or not np.all(np.isfinite(grad.values)):
            raise TrainingDivergedError(
                f"non-finite loss or gradient for image {i} at epoch {epoch}"
            )
        grads.append(grad)
        losses.append(loss)
        norms.append(float(np.linalg.norm(grad.values)))
    aggregated = aggregate_grads(grads, spec)
    optimizer.update(bank.matrix, np.stack([g.values for g in aggregated]))
    total = float(np.dot(spec.gamma, losses))
    return bank, optimizer, StepMetrics(epoch, total, losses, norms)


def train(images, arch: NetworkArch, spec: CombinerSpec, config: TrainConfig):
    """Run the full training loop; returns the final bank and its history.

    Weight set j starts from seed + j (or all from the base seed when
    ``identical_init`` is set). History rows are logged at epoch 0, every
    ``log_every`` epochs, and at the final epoch, each evaluated after the
    updates of that epoch.
    """
    images = [img for img in images]
    sets = [
        init_weights(arch, config.seed if config.identical_init else config.seed + j)
        for j in range(spec.n_sets)
    ]
    bank = WeightBank.from_sets(sets)
    _check_setup(bank, spec, images)
    h, w, _c = images[0].dims
    coords = coord_grid(h, w)
    targets = _signed_targets(images)

    history = TrainHistory()
    running_max = [0.0] * spec.n_images

    total0, losses0, psnrs0 = _eval_losses_psnr(bank, spec, targets, coords)
    history.append(0, total0, losses0, psnrs0, running_max)

    optimizer = make_optimizer(config)
    guard = config.divergence_factor * total0 if total0 > 0 else math.inf

    for epoch in range(1, config.epochs + 1):
        bank, optimizer, metrics = train_step(bank, spec, images, coords, optimizer, epoch)
        if metrics.total_loss > guard:
            raise TrainingDivergedError(
                f"total loss {metrics.total_loss:.3e} exceeded "
                f"{config.divergence_factor:.0e} x its initial value at epoch {epoch}"
            )
        running_max = [max(a, b) for a, b in zip(running_max, metrics.grad_norms)]
        if epoch % config.log_every == 0 or epoch == config.epochs:
            total, losses, psnrs = _eval_losses_psnr(bank, spec, targets, coords)
            history.append(epoch, total, losses, psnrs, running_max)

    return bank, history
