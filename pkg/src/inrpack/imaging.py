"""Image containers, coordinate grids, PSNR, PNG I/O and reconstruction."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from .siren import forward
from .weights import Bundle, combine

__all__ = [
    "ImageTensor",
    "coord_grid",
    "psnr",
    "reconstruct",
    "downsample2x",
    "residual",
    "load_png",
    "save_png",
    "rotate_to_landscape",
    "UnsupportedImageError",
]

UNIT = "unit"      # pixel values in [0, 1]
SIGNED = "signed"  # pixel values in [-1, 1]


class UnsupportedImageError(ValueError):
    """The file decodes but is not an 8-bit grayscale or RGB PNG."""


@dataclass(frozen=True)
class ImageTensor:
    """H x W x C pixel array tagged with its value range; clamped on construction."""

    data: np.ndarray = field(repr=False)
    value_range: str = UNIT

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim == 2:
            data = data[:, :, None]
        if data.ndim != 3 or data.shape[2] not in (1, 3):
            raise ValueError(f"expected (H, W, C) with C in (1, 3), got {data.shape}")
        if self.value_range == UNIT:
            data = np.clip(data, 0.0, 1.0)
        elif self.value_range == SIGNED:
            data = np.clip(data, -1.0, 1.0)
        else:
            raise ValueError(f"unknown value range {self.value_range!r}")
        object.__setattr__(self, "data", data)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def dims(self) -> tuple:
        return self.data.shape

    def pixels(self) -> np.ndarray:
        """(H*W, C) row-major view of the pixel values."""
        return self.data.reshape(-1, self.data.shape[2])

    def to_unit(self) -> "ImageTensor":
        if self.value_range == UNIT:
            return self
        return ImageTensor((self.data + 1.0) / 2.0, UNIT)

    def to_signed(self) -> "ImageTensor":
        if self.value_range == SIGNED:
            return self
        return ImageTensor(self.data * 2.0 - 1.0, SIGNED)

    def to_rgb(self) -> "ImageTensor":
        if self.channels == 3:
            return self
        return ImageTensor(np.repeat(self.data, 3, axis=2), self.value_range)


def coord_grid(height: int, width: int) -> np.ndarray:
    """Row-major (x, y) coordinates covering [-1, 1] endpoint-inclusive.

    x runs over columns and y over rows; a singleton dimension maps to 0.
    """
    if height < 1 or width < 1:
        raise ValueError(f"grid dims must be >= 1, got ({height}, {width})")
    xs = np.linspace(-1.0, 1.0, width) if width > 1 else np.zeros(1)
    ys = np.linspace(-1.0, 1.0, height) if height > 1 else np.zeros(1)
    xg, yg = np.meshgrid(xs, ys)
    return np.stack([xg.ravel(), yg.ravel()], axis=1)


def psnr(a: ImageTensor, b: ImageTensor) -> float:
    """Peak signal-to-noise ratio in dB over unit-range images; +inf when equal."""
    if a.value_range != UNIT or b.value_range != UNIT:
        raise ValueError("psnr expects unit-range images")
    if a.dims != b.dims:
        raise ValueError(f"image dims differ: {a.dims} vs {b.dims}")
    diff = a.data - b.data
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def downsample2x(img: ImageTensor) -> ImageTensor:
    """Halve each spatial dimension with a 2x2 box average."""
    h, w, c = img.dims
    if h % 2 or w % 2:
        raise ValueError(f"downsample2x needs even dims, got ({h}, {w})")
    boxes = img.data.reshape(h // 2, 2, w // 2, 2, c)
    return ImageTensor(boxes.mean(axis=(1, 3)), img.value_range)


def residual(a: ImageTensor, b: ImageTensor) -> ImageTensor:
    """Absolute difference rescaled so its own maximum equals 1 (zeros if equal)."""
    if a.dims != b.dims:
        raise ValueError(f"image dims differ: {a.dims} vs {b.dims}")
    diff = np.abs(a.data - b.data)
    peak = diff.max()
    if peak > 0:
        diff = diff / peak
    return ImageTensor(diff, UNIT)


def reconstruct(bundle: Bundle, image_index: int, scale: float = 1.0) -> ImageTensor:
    """Render image ``image_index`` (1-based) from a bundle at ``scale`` times
    its stored resolution; outputs are mapped to unit range and clamped."""
    if not 1 <= image_index <= bundle.n_images:
        raise IndexError(
            f"image index {image_index} outside 1..{bundle.n_images}"
        )
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale}")
    h, w, _c = bundle.dims
    out_h = max(1, int(round(scale * h)))
    out_w = max(1, int(round(scale * w)))
    weights = combine(bundle.bank, bundle.combiner.alpha[image_index - 1])
    pred = forward(weights, coord_grid(out_h, out_w))
    unit = (pred + 1.0) / 2.0
    return ImageTensor(unit.reshape(out_h, out_w, -1), UNIT)


def rotate_to_landscape(img: ImageTensor):
    """Rotate a portrait image 90 degrees counterclockwise; returns
    (image, rotated_flag)."""
    if img.height <= img.width:
        return img, False
    return ImageTensor(np.rot90(img.data, axes=(0, 1)).copy(), img.value_range), True


def load_png(path) -> ImageTensor:
    """Read an 8-bit grayscale or RGB PNG into a unit-range tensor."""
    with Image.open(path) as im:
        if im.format != "PNG":
            raise UnsupportedImageError(f"{path}: expected a PNG file, got {im.format}")
        if im.mode not in ("L", "RGB"):
            raise UnsupportedImageError(
                f"{path}: unsupported PNG mode {im.mode!r}; need 8-bit L or RGB"
            )
        data = np.asarray(im, dtype=np.float64) / 255.0
    return ImageTensor(data, UNIT)


def save_png(img: ImageTensor, path) -> None:
    """Write as 8-bit PNG, rounding half up to the nearest level."""
    unit = img.to_unit()
    levels = np.floor(unit.data * 255.0 + 0.5).astype(np.uint8)
    if img.channels == 1:
        Image.fromarray(levels[:, :, 0], mode="L").save(path, format="PNG")
    else:
        Image.fromarray(levels, mode="RGB").save(path, format="PNG")
