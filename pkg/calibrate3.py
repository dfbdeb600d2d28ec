"""Calibration round 3: shared band-limited noise texture on the glyph pair."""
import json
import time

import numpy as np

import inrpack as ip
from inrpack.imaging import ImageTensor
from inrpack.synth import average_image, cross_glyph, landscape_crop, plus_glyph


def noise_field(size, seed, cutoff=0.5, std=0.10):
    rng = np.random.default_rng(seed)
    white = rng.normal(size=(size, size))
    spectrum = np.fft.fft2(white)
    f = np.fft.fftfreq(size)
    r = np.hypot(*np.meshgrid(f, f))  # cycles/pixel, nyquist 0.5
    rolloff = np.exp(-((r / (cutoff * 0.5)) ** 4))
    field = np.real(np.fft.ifft2(spectrum * rolloff))
    field *= std / field.std()
    return field[:, :, None]


def textured_pair(size, cutoff, std, seed=1234):
    t = noise_field(size, seed, cutoff, std)
    a = np.clip(0.15 + 0.7 * plus_glyph(size).data + t, 0, 1)
    b = np.clip(0.15 + 0.7 * cross_glyph(size).data + t, 0, 1)
    return ImageTensor(a, "unit"), ImageTensor(b, "unit")


out = {}
arch = ip.NetworkArch(4, 64)

# Short probes at two texture settings
for cutoff, std in [(0.5, 0.10), (0.7, 0.14)]:
    A, B = textured_pair(64, cutoff, std)
    imgs = [A, average_image(A, B), B]
    cfg = ip.TrainConfig(epochs=600, seed=42, log_every=600)
    t0 = time.perf_counter()
    _, hist = ip.train(imgs, arch, ip.default_combiner(3), cfg)
    key = f"probe_c{cutoff}_s{std}"
    out[key] = {"psnr600": hist.final_psnr(), "secs": time.perf_counter() - t0}
    print(key, out[key], flush=True)

with open("/root/pkg/calibration3.json", "w") as fh:
    json.dump(out, fh, indent=2)
print("DONE", flush=True)
