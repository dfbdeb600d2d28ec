"""Sweep the bit rate two ways: shrink the network, or pack in more images.

Reproduces the two rate-control axes on a small synthetic set. Bits per pixel
is N * P * 16 / (M * H * W * C), so doubling the image count M halves the rate
with the same two weight sets, while changing (layers, neurons) moves P.
"""

import numpy as np

import inrpack as ip
from inrpack.synth import photo_like_set

images = photo_like_set(8, size=32, seed=3)
dims = images[0].dims
config = ip.TrainConfig(epochs=800, learning_rate=1e-3, seed=7, log_every=800)

print("varying M (images per pair of weight sets), fixed l=3, n=24")
arch = ip.NetworkArch(3, 24)
print(f"{'M':>3} {'bpp':>8} {'mean PSNR':>10} {'std':>6}")
for m in (2, 4, 8):
    spec = ip.default_combiner(m)
    _, history = ip.train(images[:m], arch, spec, config)
    rate = ip.bpp(arch, 2, m, dims)
    psnrs = history.final_psnr()
    print(f"{m:>3} {rate:8.4f} {np.mean(psnrs):10.2f} {np.std(psnrs):6.2f}")

print("\nvarying the architecture, fixed M=4")
spec = ip.default_combiner(4)
print(f"{'l':>3} {'n':>4} {'P':>6} {'bpp':>8} {'mean PSNR':>10}")
for l, n in ((2, 16), (3, 24), (4, 32)):
    arch = ip.NetworkArch(l, n)
    _, history = ip.train(images[:4], arch, spec, config)
    rate = ip.bpp(arch, 2, 4, dims)
    print(f"{l:>3} {n:>4} {ip.param_count(arch):>6} {rate:8.4f} "
          f"{np.mean(history.final_psnr()):10.2f}")
