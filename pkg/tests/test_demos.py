"""Demo protocols: structure and wiring (the phenomena themselves are covered
by the acceptance suite at full desk scale)."""

import numpy as np
import pytest

from inrpack.demos import (
    DEMO_MODES,
    constrained_average,
    different_third,
    naive_average,
    run_demo,
)
from inrpack.siren import NetworkArch
from inrpack.synth import cross_glyph, landscape_crop, plus_glyph
from inrpack.training import TrainConfig

TINY = TrainConfig(epochs=3, seed=0, log_every=2)
ARCH = NetworkArch(1, 8)


class TestNaiveAverage:
    def test_structure(self):
        result = naive_average(plus_glyph(12), cross_glyph(12), ARCH, TINY)
        assert result.mode == "naive-average"
        assert result.labels == ["first", "second", "pixel-average"]
        assert len(result.bank) == 2
        assert set(result.psnr_table) == set(result.labels)
        # one shared reconstruction rendered from the averaged weights
        assert all(
            np.array_equal(r.data, result.reconstructions[0].data)
            for r in result.reconstructions
        )

    def test_identical_inits_used(self):
        """Both single-image runs start from the same draw, so with zero
        epochs the two banks coincide."""
        cfg = TrainConfig(epochs=0, seed=5)
        result = naive_average(plus_glyph(8), cross_glyph(8), ARCH, cfg)
        assert np.array_equal(result.bank.matrix[0], result.bank.matrix[1])


class TestJointDemos:
    def test_constrained_average_targets(self):
        result = constrained_average(plus_glyph(12), cross_glyph(12), ARCH, TINY)
        assert result.labels == ["first", "combined", "second"]
        mid = (plus_glyph(12).data + cross_glyph(12).data) / 2
        np.testing.assert_allclose(result.images[1].data, mid)
        np.testing.assert_allclose(result.combiner.alpha[1], [0.5, 0.5])

    def test_different_third_uses_given_image(self):
        scene = landscape_crop(12)
        result = different_third(plus_glyph(12), cross_glyph(12), scene, ARCH, TINY)
        assert result.labels == ["first", "third", "second"]
        np.testing.assert_array_equal(result.images[1].data, scene.data)

    def test_residuals_match_reconstruction_pairs(self):
        result = constrained_average(plus_glyph(10), cross_glyph(10), ARCH, TINY)
        assert len(result.residuals) == 3
        for res in result.residuals:
            assert res.dims == (10, 10, 3)


class TestRunDemo:
    def test_dispatch_all_modes(self):
        for mode in DEMO_MODES:
            result = run_demo(mode, ARCH, TINY, size=10)
            assert result.mode == mode

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            run_demo("no-such-mode", ARCH, TINY)

    def test_summary_is_json_friendly(self):
        result = run_demo("constrained-average", ARCH, TINY, size=8)
        summary = result.summary()
        assert summary["mode"] == "constrained-average"
        assert all(isinstance(v, float) for v in summary["psnr_db"].values())
