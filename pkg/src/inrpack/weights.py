"""Algebra over banks of weight sets and the serialized bundle format.

A bank holds the N trainable weight sets as an (N, P) float64 matrix, so a
per-image combination is one row-vector product and gradient aggregation is
one matrix product. Bundles store the bank at IEEE half precision together
with a small header carrying the architecture, the combiner matrix and the
per-image loss weights.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .siren import GradientSet, NetworkArch, WeightSet, param_count

__all__ = [
    "WeightBank",
    "CombinerSpec",
    "Bundle",
    "combine",
    "default_combiner",
    "identity_combiner",
    "aggregate_grads",
    "bpp",
    "serialize_bundle",
    "deserialize_bundle",
    "bundle_size",
    "UnsupportedCombinerError",
    "BundleError",
    "BadMagicError",
    "VersionMismatchError",
    "TruncatedBundleError",
    "PayloadLengthError",
    "InvalidHeaderError",
]


class UnsupportedCombinerError(ValueError):
    """No built-in combiner rule covers the requested (N, M); supply a matrix."""


class BundleError(Exception):
    """Base class for malformed bundle bytes."""


class BadMagicError(BundleError):
    pass


class VersionMismatchError(BundleError):
    pass


class TruncatedBundleError(BundleError):
    pass


class PayloadLengthError(BundleError):
    """Header-declared size and actual byte count disagree (too many bytes)."""


class InvalidHeaderError(BundleError):
    """Header parses but declares impossible or unsupported field values."""


class WeightBank:
    """Ordered, shape-congruent collection of N weight sets."""

    def __init__(self, arch: NetworkArch, matrix: np.ndarray):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] < 1:
            raise ValueError(f"bank matrix must be (N, P) with N >= 1, got {matrix.shape}")
        if matrix.shape[1] != param_count(arch):
            raise ValueError(
                f"bank row length {matrix.shape[1]} != param_count {param_count(arch)}"
            )
        self.arch = arch
        self.matrix = matrix

    @classmethod
    def from_sets(cls, sets) -> "WeightBank":
        sets = list(sets)
        if not sets:
            raise ValueError("bank needs at least one weight set")
        arch = sets[0].arch
        if any(s.arch != arch for s in sets):
            raise ValueError("all weight sets in a bank must share one architecture")
        return cls(arch, np.stack([s.values for s in sets]))

    def __len__(self) -> int:
        return self.matrix.shape[0]

    def __getitem__(self, j: int) -> WeightSet:
        return WeightSet(self.arch, self.matrix[j])

    def copy(self) -> "WeightBank":
        return WeightBank(self.arch, self.matrix.copy())


_F32_EPS = float(np.finfo(np.float32).eps)


@dataclass(frozen=True)
class CombinerSpec:
    """Fixed combination matrix (M rows of N coefficients) plus loss weights.

    ``gamma`` entries are positive convex coefficients; the sum-to-one check
    uses ``gamma_sum_tol`` so specs rebuilt from 32-bit headers stay valid.
    """

    alpha: np.ndarray
    gamma: np.ndarray
    gamma_sum_tol: float = field(default=1e-9, compare=False)

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=np.float64)
        gamma = np.asarray(self.gamma, dtype=np.float64)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "gamma", gamma)
        if alpha.ndim != 2:
            raise ValueError(f"alpha must be a 2-D (M, N) matrix, got shape {alpha.shape}")
        m, n = alpha.shape
        if not m >= n >= 1:
            raise ValueError(f"need M >= N >= 1, got M={m}, N={n}")
        if not np.all(np.isfinite(alpha)):
            raise ValueError("alpha entries must be finite")
        if gamma.shape != (m,):
            raise ValueError(f"gamma must have one entry per image, got shape {gamma.shape}")
        if not np.all((gamma > 0.0) & (gamma <= 1.0)):
            raise ValueError("every gamma entry must lie in (0, 1]")
        if abs(float(gamma.sum()) - 1.0) > self.gamma_sum_tol:
            raise ValueError(f"gamma must sum to 1 within {self.gamma_sum_tol}")

    @property
    def n_images(self) -> int:
        return self.alpha.shape[0]

    @property
    def n_sets(self) -> int:
        return self.alpha.shape[1]


def default_combiner(n_images: int, n_sets: int = 2) -> CombinerSpec:
    """Built-in two-endpoint combiner: image i mixes the two weight sets as
    ((M-i)/(M-1), (i-1)/(M-1)), with uniform loss weights.

    Only the two-set rule is published; any other N needs an explicit matrix.
    """
    if n_sets != 2:
        raise UnsupportedCombinerError(
            f"no default combiner for N={n_sets}; supply an explicit M x N matrix"
        )
    if n_images < 2:
        raise UnsupportedCombinerError("the two-set default combiner needs M >= 2")
    i = np.arange(1, n_images + 1, dtype=np.float64)
    alpha = np.stack([(n_images - i) / (n_images - 1), (i - 1) / (n_images - 1)], axis=1)
    gamma = np.full(n_images, 1.0 / n_images)
    return CombinerSpec(alpha, gamma)


def identity_combiner(n_images: int) -> CombinerSpec:
    """M = N identity mixing: every image gets its own weight set (independent
    training expressed in the combined form)."""
    gamma = np.full(n_images, 1.0 / n_images)
    return CombinerSpec(np.eye(n_images), gamma)


def combine(bank: WeightBank, alpha_row) -> WeightSet:
    """Elementwise linear combination sum_j alpha[j] * theta_j."""
    alpha_row = np.asarray(alpha_row, dtype=np.float64)
    if alpha_row.shape != (len(bank),):
        raise ValueError(
            f"alpha row length {alpha_row.shape} does not match bank size {len(bank)}"
        )
    return WeightSet(bank.arch, alpha_row @ bank.matrix)


def aggregate_grads(per_image, spec: CombinerSpec):
    """Pull M per-image gradients back onto the N weight sets.

    Output j is sum_i alpha[i, j] * gamma[i] * grad_i, the chain-rule gradient
    of the weighted total loss with respect to weight set j.
    """
    per_image = list(per_image)
    if len(per_image) != spec.n_images:
        raise ValueError(
            f"got {len(per_image)} gradients for a {spec.n_images}-image combiner"
        )
    arch = per_image[0].arch
    if any(g.arch != arch for g in per_image):
        raise ValueError("gradient sets must share one architecture")
    g = np.stack([gr.values for gr in per_image])
    out = (spec.alpha * spec.gamma[:, None]).T @ g
    return [GradientSet(arch, out[j]) for j in range(spec.n_sets)]


def bpp(arch: NetworkArch, n_sets: int, n_images: int, dims, bit_width: int = 16) -> float:
    """Bits per pixel: N * P * B / (M * H * W * C)."""
    h, w, c = dims
    if min(n_sets, n_images, h, w, c, bit_width) < 1:
        raise ValueError("all bit-rate inputs must be positive")
    return (n_sets * param_count(arch) * bit_width) / (n_images * h * w * c)


MAGIC = b"INRB"
FORMAT_VERSION = 1
_FIXED_HEADER = struct.Struct("<4sHBHBHfBHHB")


@dataclass
class Bundle:
    """The compressed artifact: a weight bank plus the header metadata
    (combiner, loss weights, image dimensions) needed to reconstruct."""

    bank: WeightBank
    combiner: CombinerSpec
    dims: tuple  # (H, W, C) of the training images
    bit_width: int = 16

    def __post_init__(self):
        if len(self.bank) != self.combiner.n_sets:
            raise ValueError(
                f"bank has {len(self.bank)} sets but combiner expects {self.combiner.n_sets}"
            )
        h, w, c = self.dims
        if h < 1 or w < 1 or c not in (1, 3):
            raise ValueError(f"bad image dims {self.dims}")
        if self.bit_width != 16:
            raise ValueError("only 16-bit weight storage is supported")

    @property
    def arch(self) -> NetworkArch:
        return self.bank.arch

    @property
    def n_images(self) -> int:
        return self.combiner.n_images

    def bpp(self) -> float:
        return bpp(self.arch, len(self.bank), self.n_images, self.dims, self.bit_width)


def bundle_size(arch: NetworkArch, n_sets: int, n_images: int) -> int:
    """Exact byte length of a serialized bundle."""
    header = _FIXED_HEADER.size + n_images * n_sets * 4 + n_images * 4
    return header + n_sets * param_count(arch) * 2


def serialize_bundle(bundle: Bundle) -> bytes:
    """Encode to the little-endian wire format; weights round to nearest-even
    half precision."""
    arch = bundle.arch
    n_sets = len(bundle.bank)
    n_images = bundle.n_images
    h, w, c = bundle.dims
    if n_sets > 0xFF or n_images > 0xFFFF:
        raise ValueError("too many weight sets or images for the header fields")
    if arch.hidden_layers > 0xFF or arch.neurons > 0xFFFF or h > 0xFFFF or w > 0xFFFF:
        raise ValueError("architecture or image dims exceed header field ranges")
    parts = [
        _FIXED_HEADER.pack(
            MAGIC,
            FORMAT_VERSION,
            n_sets,
            n_images,
            arch.hidden_layers,
            arch.neurons,
            arch.omega0,
            bundle.bit_width,
            h,
            w,
            c,
        ),
        bundle.combiner.alpha.astype("<f4").tobytes(),
        bundle.combiner.gamma.astype("<f4").tobytes(),
        bundle.bank.matrix.astype("<f2").tobytes(),
    ]
    return b"".join(parts)


def deserialize_bundle(data: bytes) -> Bundle:
    """Decode bundle bytes, widening stored half-precision weights to float64.

    Raises a distinct error per failure mode: wrong magic, unknown version,
    missing bytes, or a byte count that disagrees with the header.
    """
    if len(data) >= 4 and data[:4] != MAGIC:
        raise BadMagicError(f"expected magic {MAGIC!r}, got {data[:4]!r}")
    if len(data) < _FIXED_HEADER.size:
        raise TruncatedBundleError(
            f"need {_FIXED_HEADER.size} header bytes, got {len(data)}"
        )
    (magic, version, n_sets, n_images, layers, neurons, omega0, bit_width, h, w, c) = (
        _FIXED_HEADER.unpack_from(data)
    )
    if magic != MAGIC:
        raise BadMagicError(f"expected magic {MAGIC!r}, got {magic!r}")
    if version != FORMAT_VERSION:
        raise VersionMismatchError(f"unsupported bundle version {version}")
    if bit_width != 16:
        raise InvalidHeaderError(f"version-1 bundles store 16-bit weights, header says {bit_width}")
    if n_sets < 1 or n_images < n_sets or layers < 1 or neurons < 1:
        raise InvalidHeaderError(
            f"impossible header: N={n_sets}, M={n_images}, l={layers}, n={neurons}"
        )
    if h < 1 or w < 1 or c not in (1, 3):
        raise InvalidHeaderError(f"impossible image dims ({h}, {w}, {c})")
    if not omega0 > 0:
        raise InvalidHeaderError(f"omega0 must be positive, header says {omega0}")

    arch = NetworkArch(hidden_layers=layers, neurons=neurons, omega0=float(omega0))
    p = param_count(arch)
    expected = bundle_size(arch, n_sets, n_images)
    if len(data) < expected:
        raise TruncatedBundleError(f"bundle needs {expected} bytes, got {len(data)}")
    if len(data) > expected:
        raise PayloadLengthError(
            f"header implies {expected} bytes but payload has {len(data)}"
        )

    pos = _FIXED_HEADER.size
    alpha = np.frombuffer(data, dtype="<f4", count=n_images * n_sets, offset=pos)
    alpha = alpha.astype(np.float64).reshape(n_images, n_sets)
    pos += n_images * n_sets * 4
    gamma = np.frombuffer(data, dtype="<f4", count=n_images, offset=pos).astype(np.float64)
    pos += n_images * 4
    payload = np.frombuffer(data, dtype="<f2", count=n_sets * p, offset=pos)
    matrix = payload.astype(np.float64).reshape(n_sets, p)

    # 32-bit storage of gamma shifts its sum by up to ~M ulps; accept that.
    sum_tol = max(1e-9, 4.0 * n_images * _F32_EPS)
    try:
        spec = CombinerSpec(alpha, gamma, gamma_sum_tol=sum_tol)
    except ValueError as exc:
        raise InvalidHeaderError(f"stored combiner is invalid: {exc}") from exc
    return Bundle(WeightBank(arch, matrix), spec, (h, w, c))
