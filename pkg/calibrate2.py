"""Calibration round 2: harder glyphs for the demo criteria, smooth scenes
for the arbitrary-resolution protocol."""
import json
import time

import numpy as np

import inrpack as ip
from inrpack.demos import constrained_average, different_third, naive_average
from inrpack.imaging import downsample2x, psnr, reconstruct
from inrpack.synth import (
    average_image,
    cross_glyph,
    landscape_crop,
    plus_glyph,
)
from inrpack.weights import Bundle, deserialize_bundle, serialize_bundle

out = {}
arch = ip.NetworkArch(4, 64)
cfg = ip.TrainConfig(epochs=2000, learning_rate=1e-3, seed=42, log_every=1000)

# Harder glyphs: thinner bars, sharper edge
HW, EDGE = 0.10, 0.025
A = plus_glyph(64, half_width=HW, edge=EDGE)
B = cross_glyph(64, half_width=HW, edge=EDGE)
C = landscape_crop(64)

t0 = time.perf_counter()
res_con = constrained_average(A, B, arch, cfg)
out["constrained_hard"] = {"psnr": res_con.psnr_table, "secs": time.perf_counter() - t0}
print("constrained_hard:", out["constrained_hard"], flush=True)

def quant_delta(result, targets):
    bundle = Bundle(result.bank, result.combiner, targets[0].dims)
    rt = deserialize_bundle(serialize_bundle(bundle))
    deltas = []
    for i, img in enumerate(targets):
        p64 = result.psnr_table[result.labels[i]]
        p16 = psnr(reconstruct(rt, i + 1), img.to_unit())
        deltas.append((p64 - p16) / p64 * 100.0)
    return deltas

out["quant_constrained_hard"] = quant_delta(res_con, [A, average_image(A, B), B])
print("quant:", out["quant_constrained_hard"], flush=True)

t0 = time.perf_counter()
res_diff = different_third(A, B, C, arch, cfg)
out["different_hard"] = {"psnr": res_diff.psnr_table, "secs": time.perf_counter() - t0}
out["quant_different_hard"] = quant_delta(res_diff, [A, C, B])
print("different_hard:", out["different_hard"], out["quant_different_hard"], flush=True)

t0 = time.perf_counter()
res_naive = naive_average(A, B, arch, cfg)
out["naive_hard"] = {"psnr": res_naive.psnr_table, "secs": time.perf_counter() - t0}
print("naive_hard:", out["naive_hard"], flush=True)

# Criterion 8 set: smooth scenes (landscape variants via synth module)
from inrpack.synth import photo_like_set
smooth = [landscape_crop(64)] + photo_like_set(2, 64, seed=7)
spec = ip.default_combiner(3)

t0 = time.perf_counter()
bank_nat, hist_nat = ip.train(smooth, arch, spec, cfg)
native = hist_nat.final_psnr()
small = [downsample2x(img) for img in smooth]
bank_dn, hist_dn = ip.train(small, arch, spec, cfg)
bundle_dn = Bundle(bank_dn, spec, small[0].dims)
ups = [psnr(reconstruct(bundle_dn, i + 1, 2.0), img.to_unit()) for i, img in enumerate(smooth)]
out["smooth_upscale"] = {
    "native": native,
    "upscaled": ups,
    "gaps": [n - u for n, u in zip(native, ups)],
    "secs": time.perf_counter() - t0,
}
print("smooth_upscale:", out["smooth_upscale"], flush=True)

with open("/root/pkg/calibration2.json", "w") as fh:
    json.dump(out, fh, indent=2)
print("DONE", flush=True)
