"""Shared test utilities: finite-difference oracles and tiny fixtures."""

import numpy as np

from inrpack.siren import loss_and_grad


def finite_diff_entry(fn, vector, idx, step=1e-4):
    """Central finite difference of scalar fn at vector[idx]."""
    plus = vector.copy()
    plus[idx] += step
    minus = vector.copy()
    minus[idx] -= step
    return (fn(plus) - fn(minus)) / (2.0 * step)


def loss_of(weights, coords, target):
    """Loss-only closure over flat parameter values."""

    def fn(values):
        w = weights.copy()
        w.values[:] = values
        loss, _ = loss_and_grad(w, coords, target)
        return loss

    return fn


def check_grad_sample(weights, coords, target, rng, sample=100,
                      rel_tol=1e-4, abs_floor=1e-7, step=1e-4):
    """Compare a random sample of analytic partials against central differences.

    A partial passes when it matches within rel_tol relatively or within the
    absolute floor (which absorbs finite-difference truncation noise on
    near-zero derivatives). Returns the worst absolute mismatch seen.
    """
    _, grad = loss_and_grad(weights, coords, target)
    fn = loss_of(weights, coords, target)
    size = len(weights.values)
    idxs = rng.choice(size, size=min(sample, size), replace=False)
    worst = 0.0
    for idx in idxs:
        fd = finite_diff_entry(fn, weights.values, idx, step)
        diff = abs(grad.values[idx] - fd)
        worst = max(worst, diff)
        assert diff <= max(rel_tol * abs(fd), abs_floor), (
            f"grad[{idx}] = {grad.values[idx]:.10g} vs fd {fd:.10g} (|diff| {diff:.3g})"
        )
    return worst


def random_net_case(rng, max_layers=3, max_neurons=8, max_pixels=64):
    """Random tiny architecture plus matching coords/target arrays."""
    from inrpack.siren import NetworkArch, init_weights

    arch = NetworkArch(
        hidden_layers=int(rng.integers(1, max_layers + 1)),
        neurons=int(rng.integers(1, max_neurons + 1)),
    )
    npix = int(rng.integers(4, max_pixels + 1))
    coords = rng.uniform(-1.0, 1.0, (npix, arch.input_dim))
    target = rng.uniform(-1.0, 1.0, (npix, arch.output_dim))
    weights = init_weights(arch, int(rng.integers(0, 2**31)))
    return arch, weights, coords, target
