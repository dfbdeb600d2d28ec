"""One-off calibration of the heavy acceptance protocols; writes JSON results."""
import json
import time

import numpy as np

import inrpack as ip
from inrpack.demos import constrained_average, different_third, naive_average
from inrpack.imaging import downsample2x, psnr, reconstruct
from inrpack.synth import cross_glyph, landscape_crop, photo_like_set, plus_glyph
from inrpack.weights import Bundle, deserialize_bundle, serialize_bundle

out = {}
arch = ip.NetworkArch(4, 64)
cfg = ip.TrainConfig(epochs=2000, learning_rate=1e-3, seed=42, log_every=500)
A, B = plus_glyph(64), cross_glyph(64)
C = landscape_crop(64)

t0 = time.perf_counter()
res_naive = naive_average(A, B, arch, cfg)
out["naive"] = {"psnr": res_naive.psnr_table, "secs": time.perf_counter() - t0}
print("naive:", out["naive"], flush=True)

t0 = time.perf_counter()
res_con = constrained_average(A, B, arch, cfg)
out["constrained"] = {"psnr": res_con.psnr_table, "secs": time.perf_counter() - t0}
print("constrained:", out["constrained"], flush=True)

t0 = time.perf_counter()
res_diff = different_third(A, B, C, arch, cfg)
out["different"] = {"psnr": res_diff.psnr_table, "secs": time.perf_counter() - t0}
print("different:", out["different"], flush=True)

# criterion 7: f16 round-trip PSNR degradation on the constrained/different models
def quant_delta(result, targets):
    spec = result.combiner
    bundle = Bundle(result.bank, spec, targets[0].dims)
    rt = deserialize_bundle(serialize_bundle(bundle))
    deltas = []
    for i, img in enumerate(targets):
        p64 = result.psnr_table[result.labels[i]]
        p16 = psnr(reconstruct(rt, i + 1), img.to_unit())
        deltas.append((p64 - p16) / p64 * 100.0)
    return deltas

from inrpack.synth import average_image
out["quant_pct_constrained"] = quant_delta(res_con, [A, average_image(A, B), B])
out["quant_pct_different"] = quant_delta(res_diff, [A, C, B])
print("quant:", out["quant_pct_constrained"], out["quant_pct_different"], flush=True)

# criterion 8: train on 2x downsampled, reconstruct at original size
t0 = time.perf_counter()
targets_small = [downsample2x(img) for img in (A, average_image(A, B), B)]
spec = ip.default_combiner(3)
bank_small, hist_small = ip.train(targets_small, arch, spec, cfg)
bundle_small = Bundle(bank_small, spec, targets_small[0].dims)
ups = [psnr(reconstruct(bundle_small, i + 1, 2.0), img.to_unit())
       for i, img in enumerate((A, average_image(A, B), B))]
out["upscale"] = {
    "psnr_up": ups,
    "psnr_native": [res_con.psnr_table[k] for k in res_con.labels],
    "secs": time.perf_counter() - t0,
}
print("upscale:", out["upscale"], flush=True)

# criterion 6: M=8 photo-like 32x32, l=4 n=18, 10000 epochs
t0 = time.perf_counter()
imgs8 = photo_like_set(8, 32, seed=0)
cfg8 = ip.TrainConfig(epochs=10000, learning_rate=1e-3, seed=42, log_every=1000)
bank8, hist8 = ip.train(imgs8, ip.NetworkArch(4, 18), ip.default_combiner(8), cfg8)
out["cifar_scale"] = {
    "psnr": hist8.final_psnr(),
    "mean": float(np.mean(hist8.final_psnr())),
    "secs": time.perf_counter() - t0,
}
print("cifar-scale:", out["cifar_scale"], flush=True)

with open("/root/pkg/calibration.json", "w") as fh:
    json.dump(out, fh, indent=2)
print("DONE", flush=True)
