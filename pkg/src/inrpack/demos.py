"""The three headline experiments, as library functions.

* ``naive_average``: train two networks independently from identical
  initialization, average their weights, and see which reference image the
  averaged network actually renders.
* ``constrained_average``: train the two weight sets jointly so that their
  mean must also render the pixel-average image.
* ``different_third``: same joint setup, but the mean targets an unrelated
  third image instead of the average.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .imaging import ImageTensor, coord_grid, psnr, residual
from .siren import NetworkArch, forward
from .synth import average_image, demo_glyph_pair, demo_scene
from .training import TrainConfig, train
from .weights import CombinerSpec, WeightBank, combine, default_combiner

__all__ = [
    "DemoResult",
    "naive_average",
    "constrained_average",
    "different_third",
    "default_glyphs",
    "run_demo",
    "DEMO_MODES",
]

DEMO_MODES = ("naive-average", "constrained-average", "different-third")


@dataclass
class DemoResult:
    mode: str
    labels: list  # reference names, aligned with images/reconstructions
    images: list  # ImageTensor originals
    reconstructions: list
    residuals: list
    psnr_table: dict  # label -> dB
    bank: WeightBank
    combiner: CombinerSpec | None
    histories: list  # one TrainHistory per training run

    def summary(self) -> dict:
        return {"mode": self.mode, "psnr_db": self.psnr_table}


def _render(bank: WeightBank, alpha_row, dims) -> ImageTensor:
    h, w, _c = dims
    pred = forward(combine(bank, np.asarray(alpha_row, float)), coord_grid(h, w))
    return ImageTensor(((pred + 1.0) / 2.0).reshape(h, w, -1), "unit")


def default_glyphs(size: int = 64):
    return demo_glyph_pair(size)


def naive_average(img_a: ImageTensor, img_b: ImageTensor, arch: NetworkArch,
                  config: TrainConfig) -> DemoResult:
    """Independent training on two images from the same initial weights, then
    a 50/50 weight average. The averaged network renders roughly the
    pixel-average of the two images, which motivates the joint method."""
    single = CombinerSpec(np.array([[1.0]]), np.array([1.0]))
    cfg = replace(config, identical_init=True)
    bank_a, hist_a = train([img_a], arch, single, cfg)
    bank_b, hist_b = train([img_b], arch, single, cfg)

    bank = WeightBank(arch, np.concatenate([bank_a.matrix, bank_b.matrix]))
    avg = average_image(img_a, img_b)
    recon = _render(bank, [0.5, 0.5], img_a.dims)

    labels = ["first", "second", "pixel-average"]
    references = [img_a.to_unit(), img_b.to_unit(), avg]
    table = {lab: psnr(recon, ref) for lab, ref in zip(labels, references)}
    return DemoResult(
        mode="naive-average",
        labels=labels,
        images=references,
        reconstructions=[recon] * 3,
        residuals=[residual(recon, ref) for ref in references],
        psnr_table=table,
        bank=bank,
        combiner=None,
        histories=[hist_a, hist_b],
    )


def _joint_demo(mode: str, targets, labels, arch: NetworkArch, config: TrainConfig) -> DemoResult:
    spec = default_combiner(len(targets))
    bank, history = train(targets, arch, spec, config)
    recons = [_render(bank, spec.alpha[i], targets[i].dims) for i in range(len(targets))]
    table = {
        lab: psnr(recon, img.to_unit())
        for lab, recon, img in zip(labels, recons, targets)
    }
    return DemoResult(
        mode=mode,
        labels=list(labels),
        images=[img.to_unit() for img in targets],
        reconstructions=recons,
        residuals=[residual(r, img.to_unit()) for r, img in zip(recons, targets)],
        psnr_table=table,
        bank=bank,
        combiner=spec,
        histories=[history],
    )


def constrained_average(img_a: ImageTensor, img_b: ImageTensor, arch: NetworkArch,
                        config: TrainConfig) -> DemoResult:
    """Joint training where the mean of the two weight sets must render the
    pixel-average image as well."""
    targets = [img_a, average_image(img_a, img_b), img_b]
    return _joint_demo(
        "constrained-average", targets, ["first", "combined", "second"], arch, config
    )


def different_third(img_a: ImageTensor, img_b: ImageTensor, img_c: ImageTensor,
                    arch: NetworkArch, config: TrainConfig) -> DemoResult:
    """Joint training where the mean of the two weight sets renders an image
    unrelated to either primary."""
    targets = [img_a, img_c, img_b]
    return _joint_demo(
        "different-third", targets, ["first", "third", "second"], arch, config
    )


def run_demo(mode: str, arch: NetworkArch, config: TrainConfig, images=None,
             size: int = 64) -> DemoResult:
    """Dispatch one demo mode on user images or the built-in glyph pair."""
    if mode not in DEMO_MODES:
        raise ValueError(f"unknown demo mode {mode!r}; pick one of {DEMO_MODES}")
    if images:
        img_a, img_b = images[0], images[1]
    else:
        img_a, img_b = default_glyphs(size)
    if mode == "naive-average":
        return naive_average(img_a, img_b, arch, config)
    if mode == "constrained-average":
        return constrained_average(img_a, img_b, arch, config)
    third = images[2] if images and len(images) > 2 else demo_scene(size)
    return different_third(img_a, img_b, third, arch, config)
