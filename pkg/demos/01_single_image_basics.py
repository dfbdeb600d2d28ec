"""Fit one small image with one sine network, the classic coordinate-MLP setup.

Walks through the core objects: an architecture, a weight set, the pixel
coordinate grid, and the training loop, then reports PSNR and the weight-count
arithmetic behind the bit rate.
"""

import numpy as np

import inrpack as ip
from inrpack.synth import blob_image

# A small image and a small network. The network maps (x, y) in [-1, 1]^2 to
# RGB in [-1, 1]; the image tensor handles the range conversions.
image = blob_image(size=32, seed=5)
arch = ip.NetworkArch(hidden_layers=3, neurons=32)
print(f"network: {arch.hidden_layers} hidden layers x {arch.neurons} neurons, "
      f"{ip.param_count(arch)} parameters")

# Single image, single weight set: the combiner matrix is just [[1]].
spec = ip.CombinerSpec(np.array([[1.0]]), np.array([1.0]))
config = ip.TrainConfig(epochs=800, learning_rate=1e-3, seed=0, log_every=200)
bank, history = ip.train([image], arch, spec, config)

for epoch, psnrs in zip(history.epochs, history.per_image_psnr):
    print(f"epoch {epoch:4d}: {psnrs[0]:6.2f} dB")

# The stored form quantizes weights to 16 bits; that is what the bit rate counts.
bundle = ip.Bundle(bank, spec, image.dims)
data = ip.serialize_bundle(bundle)
print(f"bundle: {len(data)} bytes, {bundle.bpp():.3f} bits per pixel")

restored = ip.deserialize_bundle(data)
recon = ip.reconstruct(restored, image_index=1)
print(f"PSNR after 16-bit storage: {ip.psnr(recon, image):.2f} dB")
