"""Average the weights of two separately trained networks and see what renders.

Two networks are trained from the same initialization, one on a '+' sign and
one on an 'x' sign. Averaging their weights yields a network that renders
something close to the pixelwise average of the two images, which is the
observation motivating joint training.
"""

import inrpack as ip
from inrpack.demos import naive_average
from inrpack.synth import demo_glyph_pair

plus, cross = demo_glyph_pair(size=64)
arch = ip.NetworkArch(hidden_layers=4, neurons=64)
config = ip.TrainConfig(epochs=2000, learning_rate=1e-3, seed=42, log_every=500)

print("training two independent networks from identical initial weights ...")
result = naive_average(plus, cross, arch, config)

print("\nPSNR of the averaged-weights rendering against each reference:")
for label, value in result.psnr_table.items():
    print(f"  vs {label:14s}: {value:6.2f} dB")
closest = max(result.psnr_table, key=result.psnr_table.get)
print(f"\nclosest reference: {closest}")
