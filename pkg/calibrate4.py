"""Calibration round 4: dense shared-noise glyphs + band-limited smooth scenes."""
import json
import time

import numpy as np

import inrpack as ip
from inrpack.imaging import ImageTensor, downsample2x, psnr, reconstruct
from inrpack.synth import average_image, cross_glyph, landscape_crop, plus_glyph
from inrpack.weights import Bundle, deserialize_bundle, serialize_bundle


def noise_field(size, seed, cutoff, std):
    rng = np.random.default_rng(seed)
    white = rng.normal(size=(size, size))
    spectrum = np.fft.fft2(white)
    f = np.fft.fftfreq(size)
    r = np.hypot(*np.meshgrid(f, f))
    rolloff = np.exp(-((r / (cutoff * 0.5)) ** 4))
    field = np.real(np.fft.ifft2(spectrum * rolloff))
    field *= std / field.std()
    return field[:, :, None]


def textured_pair(size, cutoff, std, seed=1234):
    t = noise_field(size, seed, cutoff, std)
    a = np.clip(0.15 + 0.7 * plus_glyph(size).data + t, 0, 1)
    b = np.clip(0.15 + 0.7 * cross_glyph(size).data + t, 0, 1)
    return ImageTensor(a, "unit"), ImageTensor(b, "unit")


def textured_scene(size, cutoff=0.9, std=0.12, seed=4321):
    t = noise_field(size, seed, cutoff, std)
    return ImageTensor(np.clip(landscape_crop(size).data + t, 0, 1), "unit")


def smooth_scene(size, seed):
    """Gradients + broad blobs + low-frequency texture; nothing above the
    half-resolution Nyquist."""
    rng = np.random.default_rng(seed)
    c = (np.arange(size) + 0.5) / size * 2 - 1
    x, y = np.meshgrid(c, c)
    a, b = rng.uniform(0.15, 0.85, (2, 3))
    t = (x * rng.uniform(-1, 1) + y * rng.uniform(-1, 1) + 2) / 4
    img = a[None, None, :] * (1 - t)[:, :, None] + b[None, None, :] * t[:, :, None]
    for _ in range(4):
        cx, cy = rng.uniform(-0.7, 0.7, 2)
        width = rng.uniform(0.25, 0.5)
        color = rng.uniform(0.1, 0.9, 3)
        blob = np.exp(-(((x - cx) ** 2 + (y - cy) ** 2) / (2 * width**2)))
        img = img * (1 - 0.6 * blob[:, :, None]) + color * 0.6 * blob[:, :, None]
    img += noise_field(size, seed + 17, cutoff=0.18, std=0.06)
    return ImageTensor(np.clip(img, 0, 1), "unit")


out = {}
arch = ip.NetworkArch(4, 64)
cfg2000 = ip.TrainConfig(epochs=2000, seed=42, log_every=1000)

# --- A: dense-noise glyph probe then full constrained run
A, B = textured_pair(64, cutoff=0.9, std=0.16)
imgs = [A, average_image(A, B), B]
cfg600 = ip.TrainConfig(epochs=600, seed=42, log_every=600)
t0 = time.perf_counter()
_, hist = ip.train(imgs, arch, ip.default_combiner(3), cfg600)
out["glyph_probe600"] = hist.final_psnr()
print("glyph_probe600:", out["glyph_probe600"], flush=True)

t0 = time.perf_counter()
bank, hist = ip.train(imgs, arch, ip.default_combiner(3), cfg2000)
out["constrained2000"] = hist.final_psnr()
print("constrained2000:", out["constrained2000"], f"{time.perf_counter()-t0:.0f}s", flush=True)

bundle = Bundle(bank, ip.default_combiner(3), imgs[0].dims)
rt = deserialize_bundle(serialize_bundle(bundle))
deltas = []
for i, img in enumerate(imgs):
    p64 = hist.final_psnr()[i]
    p16 = psnr(reconstruct(rt, i + 1), img.to_unit())
    deltas.append((p64 - p16) / p64 * 100)
out["quant_constrained"] = deltas
print("quant_constrained:", deltas, flush=True)

# different-third with textured scene
C = textured_scene(64)
t0 = time.perf_counter()
bank3, hist3 = ip.train([A, C, B], arch, ip.default_combiner(3), cfg2000)
out["different2000"] = hist3.final_psnr()
bundle3 = Bundle(bank3, ip.default_combiner(3), imgs[0].dims)
rt3 = deserialize_bundle(serialize_bundle(bundle3))
deltas3 = []
for i, img in enumerate([A, C, B]):
    p64 = hist3.final_psnr()[i]
    p16 = psnr(reconstruct(rt3, i + 1), img.to_unit())
    deltas3.append((p64 - p16) / p64 * 100)
out["quant_different"] = deltas3
print("different2000:", out["different2000"], deltas3, f"{time.perf_counter()-t0:.0f}s", flush=True)

# naive average with textured pair
from inrpack.demos import naive_average
t0 = time.perf_counter()
res = naive_average(A, B, arch, cfg2000)
out["naive2000"] = res.psnr_table
print("naive2000:", res.psnr_table, f"{time.perf_counter()-t0:.0f}s", flush=True)

# --- B: smooth scenes for the resolution protocol
smooth = [smooth_scene(64, s) for s in (1, 2, 3)]
spec = ip.default_combiner(3)
t0 = time.perf_counter()
bank_n, hist_n = ip.train(smooth, arch, spec, cfg2000)
native = hist_n.final_psnr()
small = [downsample2x(img) for img in smooth]
bank_d, hist_d = ip.train(small, arch, spec, cfg2000)
bdl = Bundle(bank_d, spec, small[0].dims)
ups = [psnr(reconstruct(bdl, i + 1, 2.0), img.to_unit()) for i, img in enumerate(smooth)]
out["smooth2000"] = {"native": native, "up": ups,
                     "gap": [n - u for n, u in zip(native, ups)]}
print("smooth2000:", out["smooth2000"], f"{time.perf_counter()-t0:.0f}s", flush=True)

with open("/root/pkg/calibration4.json", "w") as fh:
    json.dump(out, fh, indent=2)
print("DONE", flush=True)
