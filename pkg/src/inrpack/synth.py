"""Built-in synthetic test images: sign glyphs and small photo-like scenes.

Everything here is deterministic. The glyphs are soft-edged distance-field
renderings (a hard binary edge would punish any coordinate network for
band-limited behavior it cannot have); the scenes are smooth composites used
where a real photograph crop would otherwise be required.
"""

from __future__ import annotations

import numpy as np

from .imaging import ImageTensor

__all__ = [
    "plus_glyph",
    "cross_glyph",
    "average_image",
    "landscape_crop",
    "blob_image",
    "photo_like_set",
    "noise_field",
    "demo_glyph_pair",
    "demo_scene",
    "smooth_scene_set",
]


def _pixel_coords(size: int):
    """Pixel-center coordinates in [-1, 1] x [-1, 1]."""
    c = (np.arange(size) + 0.5) / size * 2.0 - 1.0
    return np.meshgrid(c, c)


def _bar_distance(x, y, half_len, half_width):
    """Signed distance to an axis-aligned horizontal bar centered at origin."""
    return np.maximum(np.abs(x) - half_len, np.abs(y) - half_width)


def _soften(dist, edge):
    return np.clip(0.5 - dist / edge, 0.0, 1.0)


def plus_glyph(size: int = 64, half_len: float = 0.7, half_width: float = 0.12,
               edge: float = 0.06) -> ImageTensor:
    """White '+' sign on black, soft-edged, RGB."""
    x, y = _pixel_coords(size)
    d = np.minimum(
        _bar_distance(x, y, half_len, half_width),
        _bar_distance(y, x, half_len, half_width),
    )
    v = _soften(d, edge)
    return ImageTensor(np.repeat(v[:, :, None], 3, axis=2), "unit")


def cross_glyph(size: int = 64, half_len: float = 0.7, half_width: float = 0.12,
                edge: float = 0.06) -> ImageTensor:
    """White 'x' sign on black: the plus glyph rotated 45 degrees."""
    x, y = _pixel_coords(size)
    s = 1.0 / np.sqrt(2.0)
    xr = (x + y) * s
    yr = (y - x) * s
    d = np.minimum(
        _bar_distance(xr, yr, half_len, half_width),
        _bar_distance(yr, xr, half_len, half_width),
    )
    v = _soften(d, edge)
    return ImageTensor(np.repeat(v[:, :, None], 3, axis=2), "unit")


def average_image(a: ImageTensor, b: ImageTensor) -> ImageTensor:
    """Pixelwise average of two unit-range images."""
    if a.dims != b.dims:
        raise ValueError(f"image dims differ: {a.dims} vs {b.dims}")
    return ImageTensor((a.to_unit().data + b.to_unit().data) / 2.0, "unit")


def landscape_crop(size: int = 64) -> ImageTensor:
    """Small smooth scene (sky, sun, hills) standing in for a photo crop."""
    x, y = _pixel_coords(size)
    img = np.zeros((size, size, 3))

    # Sky: vertical blend from deep blue to warm orange near the horizon.
    t = (y + 1.0) / 2.0
    top = np.array([0.25, 0.45, 0.85])
    horizon = np.array([0.95, 0.65, 0.35])
    img += top[None, None, :] * (1.0 - t)[:, :, None] + horizon[None, None, :] * t[:, :, None]

    # Sun disk with a soft halo.
    sun = np.exp(-(((x - 0.35) ** 2 + (y + 0.25) ** 2) / 0.02))
    img += sun[:, :, None] * np.array([0.9, 0.75, 0.4])[None, None, :]

    # Rolling hills silhouette over the lower part.
    ridge = 0.35 + 0.12 * np.sin(2.6 * x + 0.8) + 0.07 * np.sin(5.1 * x - 1.2)
    hill = 1.0 / (1.0 + np.exp(-(y - ridge) * 24.0))
    hill_color = np.array([0.10, 0.30, 0.16])
    img = img * (1.0 - hill[:, :, None]) + hill_color[None, None, :] * hill[:, :, None]

    return ImageTensor(np.clip(img, 0.0, 1.0), "unit")


def blob_image(size: int, seed: int, n_blobs: int = 3) -> ImageTensor:
    """Random smooth colored Gaussian blobs on a dark background."""
    rng = np.random.default_rng(seed)
    x, y = _pixel_coords(size)
    img = np.full((size, size, 3), 0.08)
    for _ in range(n_blobs):
        cx, cy = rng.uniform(-0.7, 0.7, 2)
        width = rng.uniform(0.08, 0.35)
        color = rng.uniform(0.3, 1.0, 3)
        blob = np.exp(-(((x - cx) ** 2 + (y - cy) ** 2) / (2.0 * width ** 2)))
        img += blob[:, :, None] * color[None, None, :]
    return ImageTensor(np.clip(img, 0.0, 1.0), "unit")


def noise_field(size: int, seed: int, cutoff: float = 0.9, std: float = 0.16) -> np.ndarray:
    """Band-limited noise: white noise low-passed with a smooth spectral
    rolloff at ``cutoff`` times the Nyquist frequency, rescaled to ``std``.

    Returned as (size, size, 1) so it broadcasts over color channels.
    """
    rng = np.random.default_rng(seed)
    spectrum = np.fft.fft2(rng.normal(size=(size, size)))
    f = np.fft.fftfreq(size)
    radius = np.hypot(*np.meshgrid(f, f))
    rolloff = np.exp(-((radius / (cutoff * 0.5)) ** 4))
    field = np.real(np.fft.ifft2(spectrum * rolloff))
    field *= std / field.std()
    return field[:, :, None]


# The showcase images carry a shared textured canvas. Desk-scale networks
# overfit clean glyphs far past 50 dB, a regime where half-precision weight
# noise, not the fit, dominates the error; the texture keeps training in the
# 25..45 dB band that full-scale photographic runs actually occupy.
_GLYPH_CONTRAST = 0.7
_GLYPH_FLOOR = 0.15
_TEXTURE_SEED = 1234


def demo_glyph_pair(size: int = 64, texture_std: float = 0.16):
    """The '+' / 'x' pair on one shared band-limited noise canvas."""
    canvas = noise_field(size, _TEXTURE_SEED, std=texture_std)
    pair = []
    for glyph in (plus_glyph(size), cross_glyph(size)):
        data = _GLYPH_FLOOR + _GLYPH_CONTRAST * glyph.data + canvas
        pair.append(ImageTensor(np.clip(data, 0.0, 1.0), "unit"))
    return tuple(pair)


def demo_scene(size: int = 64, texture_std: float = 0.12) -> ImageTensor:
    """Textured color scene, unrelated to the glyphs; third demo target."""
    data = landscape_crop(size).data + noise_field(size, _TEXTURE_SEED + 1, std=texture_std)
    return ImageTensor(np.clip(data, 0.0, 1.0), "unit")


def smooth_scene_set(count: int, size: int = 64, seed: int = 0):
    """Scenes with no content above half the raster's Nyquist frequency:
    broad gradients, wide blobs, and low-frequency texture only. Downsampling
    by 2 loses almost nothing, which is what resolution-transfer runs need.
    """
    images = []
    for k in range(count):
        rng = np.random.default_rng(seed * 7919 + k + 1)
        x, y = _pixel_coords(size)
        a, b = rng.uniform(0.15, 0.85, (2, 3))
        t = (x * rng.uniform(-1, 1) + y * rng.uniform(-1, 1) + 2.0) / 4.0
        img = a[None, None, :] * (1.0 - t)[:, :, None] + b[None, None, :] * t[:, :, None]
        for _ in range(4):
            cx, cy = rng.uniform(-0.7, 0.7, 2)
            width = rng.uniform(0.25, 0.5)
            color = rng.uniform(0.1, 0.9, 3)
            blob = np.exp(-(((x - cx) ** 2 + (y - cy) ** 2) / (2.0 * width**2)))
            img = img * (1.0 - 0.6 * blob[:, :, None]) + color * 0.6 * blob[:, :, None]
        img = img + noise_field(size, seed * 7919 + k + 500, cutoff=0.18, std=0.06)
        images.append(ImageTensor(np.clip(img, 0.0, 1.0), "unit"))
    return images


def photo_like_set(count: int, size: int = 32, seed: int = 0):
    """Deterministic set of small photo-like images: gradient background,
    a few colored blobs, and one soft diagonal edge each."""
    images = []
    for k in range(count):
        rng = np.random.default_rng(seed * 1000 + k)
        x, y = _pixel_coords(size)
        a, b = rng.uniform(0.1, 0.9, (2, 3))
        t = (x * rng.uniform(-1, 1) + y * rng.uniform(-1, 1) + 2.0) / 4.0
        img = a[None, None, :] * (1.0 - t)[:, :, None] + b[None, None, :] * t[:, :, None]
        for _ in range(rng.integers(2, 5)):
            cx, cy = rng.uniform(-0.8, 0.8, 2)
            width = rng.uniform(0.1, 0.4)
            color = rng.uniform(0.0, 1.0, 3)
            blob = np.exp(-(((x - cx) ** 2 + (y - cy) ** 2) / (2.0 * width ** 2)))
            mix = 0.7 * blob[:, :, None]
            img = img * (1.0 - mix) + color[None, None, :] * mix
        # One moderately sharp edge to keep the fit non-trivial.
        nx, ny = rng.normal(size=2)
        norm = np.hypot(nx, ny) or 1.0
        edge = 1.0 / (1.0 + np.exp(-(x * nx + y * ny) / norm * 18.0))
        shade = rng.uniform(0.55, 0.85)
        img = img * (shade + (1.0 - shade) * edge[:, :, None])
        images.append(ImageTensor(np.clip(img, 0.0, 1.0), "unit"))
    return images
