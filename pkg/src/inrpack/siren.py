"""Sine-activated coordinate MLP: parameter layout, init, forward and analytic gradients.

All arithmetic is float64. A network's parameters live in a single flat
vector laid out layer by layer (weights row-major, then biases), which makes
weight-space algebra and serialization trivial while per-layer matrix views
stay free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = [
    "NetworkArch",
    "WeightSet",
    "GradientSet",
    "param_count",
    "init_weights",
    "forward",
    "loss_and_grad",
]


@dataclass(frozen=True)
class NetworkArch:
    """Shape of one fully connected sine MLP mapping (x, y) -> (r, g, b).

    ``hidden_layers`` counts the sine-activated layers; the linear output
    layer is extra and has no activation.
    """

    hidden_layers: int
    neurons: int
    omega0: float = 30.0
    input_dim: int = 2
    output_dim: int = 3

    def __post_init__(self):
        if self.hidden_layers < 1:
            raise ValueError(f"hidden_layers must be >= 1, got {self.hidden_layers}")
        if self.neurons < 1:
            raise ValueError(f"neurons must be >= 1, got {self.neurons}")
        if not self.omega0 > 0:
            raise ValueError(f"omega0 must be positive, got {self.omega0}")
        if self.input_dim < 1 or self.output_dim < 1:
            raise ValueError("input_dim and output_dim must be positive")


def param_count(arch: NetworkArch) -> int:
    """Total number of scalars (weights + biases) in one network instance."""
    l, n = arch.hidden_layers, arch.neurons
    first = (arch.input_dim + 1) * n
    hidden = (l - 1) * (n * n + n)
    out = (n + 1) * arch.output_dim
    return first + hidden + out


@lru_cache(maxsize=None)
def _layout(arch: NetworkArch):
    """Per-layer (weight_slice, (out_dim, in_dim), bias_slice) over the flat vector."""
    shapes = [(arch.neurons, arch.input_dim)]
    shapes += [(arch.neurons, arch.neurons)] * (arch.hidden_layers - 1)
    shapes += [(arch.output_dim, arch.neurons)]
    spans = []
    pos = 0
    for out_d, in_d in shapes:
        w = slice(pos, pos + out_d * in_d)
        pos += out_d * in_d
        b = slice(pos, pos + out_d)
        pos += out_d
        spans.append((w, (out_d, in_d), b))
    return tuple(spans)


@dataclass
class WeightSet:
    """All parameters of one network instance as a flat float64 vector."""

    arch: NetworkArch
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        expected = param_count(self.arch)
        if self.values.shape != (expected,):
            raise ValueError(
                f"expected {expected} scalars for {self.arch}, got shape {self.values.shape}"
            )

    def layers(self):
        """List of (weight_matrix, bias_vector) views, input layer first."""
        return [
            (self.values[w].reshape(shape), self.values[b])
            for w, shape, b in _layout(self.arch)
        ]

    def copy(self) -> "WeightSet":
        return WeightSet(self.arch, self.values.copy())

    # Elementwise linear algebra, needed to form per-image combinations.
    def __add__(self, other: "WeightSet") -> "WeightSet":
        if other.arch != self.arch:
            raise ValueError("cannot add weight sets of different architectures")
        return WeightSet(self.arch, self.values + other.values)

    def __sub__(self, other: "WeightSet") -> "WeightSet":
        if other.arch != self.arch:
            raise ValueError("cannot subtract weight sets of different architectures")
        return WeightSet(self.arch, self.values - other.values)

    def __mul__(self, scalar: float) -> "WeightSet":
        return WeightSet(self.arch, self.values * float(scalar))

    __rmul__ = __mul__


# A gradient has exactly the shape of the weights it was taken at.
GradientSet = WeightSet


def init_weights(arch: NetworkArch, seed: int) -> WeightSet:
    """Deterministic SIREN-style initialization.

    First layer uniform in [-1/input_dim, 1/input_dim]; every later layer
    (output included) uniform in +-sqrt(6/fan_in)/omega0. Biases zero.
    """
    rng = np.random.default_rng(seed)
    values = np.zeros(param_count(arch))
    for i, (w, (out_d, in_d), _b) in enumerate(_layout(arch)):
        if i == 0:
            bound = 1.0 / in_d
        else:
            bound = math.sqrt(6.0 / in_d) / arch.omega0
        values[w] = rng.uniform(-bound, bound, out_d * in_d)
    return WeightSet(arch, values)


def _forward_cached(w: WeightSet, coords: np.ndarray):
    """Forward pass keeping the activations needed for the backward pass.

    Returns (prediction, hidden_inputs, scaled_preacts) where hidden_inputs[k]
    is the input to layer k and scaled_preacts[k] = omega0 * (linear_k output).
    """
    arch = w.arch
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim != 2 or coords.shape[1] != arch.input_dim:
        raise ValueError(
            f"coords must have shape (npix, {arch.input_dim}), got {coords.shape}"
        )
    layers = w.layers()
    inputs = [coords]
    preacts = []
    h = coords
    for weight, bias in layers[:-1]:
        u = (h @ weight.T + bias) * arch.omega0
        preacts.append(u)
        h = np.sin(u)
        inputs.append(h)
    w_out, b_out = layers[-1]
    pred = h @ w_out.T + b_out
    return pred, inputs, preacts


def forward(w: WeightSet, coords: np.ndarray) -> np.ndarray:
    """Evaluate the network on an (npix, input_dim) coordinate array.

    Output is (npix, output_dim), unbounded; range handling is the caller's
    concern.
    """
    pred, _, _ = _forward_cached(w, coords)
    return pred


def loss_and_grad(w: WeightSet, coords: np.ndarray, target: np.ndarray):
    """Mean-squared-error loss against ``target`` plus its exact gradient.

    ``target`` must be an (npix, output_dim) array in the same value range as
    the raw network output (signed [-1, 1] for image training). The loss
    averages over every pixel-channel entry; the returned GradientSet holds
    d(loss)/d(parameter) for each scalar in ``w``.
    """
    arch = w.arch
    target = np.asarray(target, dtype=np.float64)
    pred, inputs, preacts = _forward_cached(w, coords)
    if target.shape != pred.shape:
        raise ValueError(f"target shape {target.shape} != prediction shape {pred.shape}")

    resid = pred - target
    loss = float(np.mean(resid * resid))

    grad = np.empty(param_count(arch))
    spans = _layout(arch)
    layers = w.layers()

    # Output layer: identity activation.
    d_out = resid * (2.0 / resid.size)
    w_sl, shape, b_sl = spans[-1]
    grad[w_sl] = (d_out.T @ inputs[-1]).reshape(-1)
    grad[b_sl] = d_out.sum(axis=0)
    delta = d_out @ layers[-1][0]

    # Hidden layers, last to first: d sin(u)/d z = omega0 * cos(u).
    for k in range(arch.hidden_layers - 1, -1, -1):
        dz = delta * np.cos(preacts[k])
        dz *= arch.omega0
        w_sl, shape, b_sl = spans[k]
        grad[w_sl] = (dz.T @ inputs[k]).reshape(-1)
        grad[b_sl] = dz.sum(axis=0)
        if k > 0:
            delta = dz @ layers[k][0]

    return loss, GradientSet(arch, grad)
