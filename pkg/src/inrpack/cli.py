"""Command-line surface: compress, decompress, metrics, sweep, verify-bounds, demo.

Exit codes: 0 success, 1 usage/config error, 2 runtime or data error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import convergence
from .demos import DEMO_MODES, run_demo
from .imaging import (
    UnsupportedImageError,
    load_png,
    psnr,
    reconstruct,
    rotate_to_landscape,
    save_png,
)
from .siren import NetworkArch, param_count
from .synth import landscape_crop
from .training import TrainConfig, TrainingDivergedError, train
from .weights import (
    Bundle,
    BundleError,
    CombinerSpec,
    UnsupportedCombinerError,
    bpp,
    default_combiner,
    deserialize_bundle,
    identity_combiner,
    serialize_bundle,
)

USAGE_ERROR = 1
DATA_ERROR = 2


class UsageError(ValueError):
    """Bad flags or config files; maps to exit code 1."""


class DataError(RuntimeError):
    """Bad input data (images, bundles); maps to exit code 2."""


class _Parser(argparse.ArgumentParser):
    """argparse defaults to exit code 2 on bad flags; we reserve 2 for data errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def _parse_arch(text: str) -> NetworkArch:
    """Parse 'l=8,n=112' into an architecture."""
    fields = {}
    try:
        for part in text.split(","):
            key, value = part.split("=")
            fields[key.strip()] = int(value)
        return NetworkArch(hidden_layers=fields["l"], neurons=fields["n"])
    except (ValueError, KeyError) as exc:
        raise UsageError(f"bad --arch {text!r}; expected like 'l=8,n=112'") from exc


def _collect_images(paths) -> list:
    files = []
    for raw in paths:
        p = Path(raw)
        if p.is_dir():
            found = sorted(p.glob("*.png"))
            if not found:
                raise UsageError(f"no .png files in directory {p}")
            files.extend(found)
        else:
            files.append(p)
    return files


def _load_inputs(files):
    """Load PNGs as RGB, rotating portrait images to landscape."""
    images = []
    rotated = []
    for i, path in enumerate(files):
        img = load_png(path).to_rgb()
        img, was_rotated = rotate_to_landscape(img)
        if was_rotated:
            rotated.append(i)
        images.append(img)
    dims = images[0].dims
    for path, img in zip(files, images):
        if img.dims != dims:
            raise DataError(
                f"input dims differ: {files[0]} is {dims}, {path} is {img.dims}"
            )
    return images, rotated


def _resolve_combiner(n_images, n_sets, combiner_arg, gamma_arg):
    if combiner_arg != "default":
        alpha = np.loadtxt(combiner_arg, delimiter=",", ndmin=2)
        if alpha.shape != (n_images, n_sets):
            raise UsageError(
                f"combiner file is {alpha.shape}, need ({n_images}, {n_sets})"
            )
    elif n_sets == 2 and n_images >= 2:
        alpha = default_combiner(n_images).alpha
    elif n_sets == n_images:
        alpha = identity_combiner(n_images).alpha
    else:
        raise UnsupportedCombinerError(
            f"no default combiner for N={n_sets}, M={n_images}; pass --combiner <csv>"
        )
    if gamma_arg == "uniform":
        gamma = np.full(n_images, 1.0 / n_images)
    else:
        gamma = np.loadtxt(gamma_arg, delimiter=",", ndmin=1)
    return CombinerSpec(alpha, gamma)


def _json_safe(value):
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return value
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def _write_json(payload: dict, path: str | None):
    text = json.dumps(_json_safe(payload), indent=2)
    if path:
        Path(path).write_text(text + "\n")
    else:
        print(text)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_compress(args) -> int:
    files = _collect_images(args.images)
    images, rotated = _load_inputs(files)
    arch = args.arch
    spec = _resolve_combiner(len(images), args.n_weights, args.combiner, args.gamma)
    config = TrainConfig(
        epochs=args.epochs,
        optimizer=args.optimizer,
        learning_rate=args.lr,
        seed=args.seed,
        log_every=args.log_every,
    )
    bank, history = train(images, arch, spec, config)
    bundle = Bundle(bank, spec, images[0].dims)
    out = Path(args.out)
    out.write_bytes(serialize_bundle(bundle))
    history_path = out.with_suffix(out.suffix + ".history.jsonl")
    history.write_jsonl(history_path)
    meta = {
        "inputs": [str(f) for f in files],
        "rotated_to_landscape": rotated,
        "seed": args.seed,
        "epochs": args.epochs,
        "final_psnr_db": history.final_psnr(),
        "bpp": bundle.bpp(),
    }
    _write_json(meta, str(out.with_suffix(out.suffix + ".meta.json")))
    for i, value in enumerate(history.final_psnr(), start=1):
        print(f"image {i}: {value:.2f} dB")
    print(f"bpp: {bundle.bpp():.4f}")
    print(f"wrote {out} ({out.stat().st_size} bytes), history {history_path}")
    return 0


def cmd_decompress(args) -> int:
    bundle = deserialize_bundle(Path(args.bundle).read_bytes())
    out = Path(args.out)
    if args.all:
        out.mkdir(parents=True, exist_ok=True)
        for index in range(1, bundle.n_images + 1):
            img = reconstruct(bundle, index, args.scale)
            save_png(img, out / f"image_{index:03d}.png")
        print(f"wrote {bundle.n_images} images to {out}")
    else:
        img = reconstruct(bundle, args.index, args.scale)
        save_png(img, out)
        print(f"wrote {out} ({img.height}x{img.width})")
    return 0


def cmd_metrics(args) -> int:
    bundle = deserialize_bundle(Path(args.bundle).read_bytes())
    report = {
        "n_weight_sets": len(bundle.bank),
        "n_images": bundle.n_images,
        "hidden_layers": bundle.arch.hidden_layers,
        "neurons_per_layer": bundle.arch.neurons,
        "param_count": param_count(bundle.arch),
        "bundle_bytes": Path(args.bundle).stat().st_size,
        "bpp": bundle.bpp(),
    }
    if args.images:
        files = _collect_images(args.images)
        originals, _ = _load_inputs(files)
        if len(originals) != bundle.n_images:
            raise DataError(
                f"bundle holds {bundle.n_images} images, got {len(originals)} originals"
            )
        values = [
            psnr(reconstruct(bundle, i + 1), originals[i].to_unit())
            for i in range(bundle.n_images)
        ]
        report["per_image_psnr_db"] = values
        finite = [v for v in values if math.isfinite(v)]
        report["mean_psnr_db"] = math.inf if len(finite) < len(values) else (
            sum(values) / len(values)
        )
    _write_json(report, args.out)
    return 0


def _sweep_points(args):
    if args.mode == "vary-M":
        if not args.m_values:
            raise UsageError("vary-M needs --m-values")
        return [("vary-M", m, args.arch) for m in args.m_values]
    if not args.archs:
        raise UsageError("vary-arch needs --archs")
    return [("vary-arch", None, arch) for arch in args.archs]


def cmd_sweep(args) -> int:
    files = _collect_images([args.images])
    images, _ = _load_inputs(files)
    points = _sweep_points(args)
    rows = []
    assignments = {}
    for mode, m_value, arch in points:
        m = m_value if m_value is not None else len(images)
        if m < 2 or m > len(images):
            rows.append((mode, m, arch, None, f"need 2..{len(images)} images, got {m}"))
            continue
        subset = images[:m]
        assignments[f"M={m}"] = [str(f) for f in files[:m]]
        spec = default_combiner(m, args.n_weights)
        config = TrainConfig(epochs=args.epochs, seed=args.seed, log_every=args.log_every)
        try:
            _bank, history = train(subset, arch, spec, config)
            rows.append((mode, m, arch, history.final_psnr(), None))
        except TrainingDivergedError as exc:
            rows.append((mode, m, arch, None, str(exc)))

    out = Path(args.out)
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["mode", "M", "l", "n", "P", "bpp", "mean_psnr", "std_psnr", "epochs", "seed", "error"]
        )
        for mode, m, arch, psnrs, error in rows:
            rate = bpp(arch, args.n_weights, m, images[0].dims)
            if psnrs is None:
                writer.writerow(
                    [mode, m, arch.hidden_layers, arch.neurons, param_count(arch),
                     f"{rate:.6f}", "", "", args.epochs, args.seed, error or ""]
                )
            else:
                writer.writerow(
                    [mode, m, arch.hidden_layers, arch.neurons, param_count(arch),
                     f"{rate:.6f}", f"{np.mean(psnrs):.3f}", f"{np.std(psnrs):.3f}",
                     args.epochs, args.seed, ""]
                )
    meta = {"images": [str(f) for f in files], "subsets": assignments}
    _write_json(meta, str(out) + ".meta.json")
    print(f"wrote {len(rows)} sweep rows to {out}")
    return 0


def cmd_verify_bounds(args) -> int:
    try:
        config = convergence.config_from_json(Path(args.config).read_text())
    except (json.JSONDecodeError, convergence.ConfigError) as exc:
        print(f"bad convergence config: {exc}", file=sys.stderr)
        return USAGE_ERROR
    report = convergence.verify(config, args.iterations)
    if args.out:
        Path(args.out).write_text(report.to_json(indent=2) + "\n")
    if report.passed:
        print(f"all bounds hold over {report.iterations} iterations")
        return 0
    name, (t, gap, bound) = report.first_violation() or (
        "tail", (None, None, None)
    )
    print(f"bound violated: {name} at t={t}: gap {gap} > bound {bound}", file=sys.stderr)
    return DATA_ERROR


def cmd_demo(args) -> int:
    arch = args.arch
    config = TrainConfig(
        epochs=args.epochs,
        learning_rate=args.lr,
        optimizer=args.optimizer,
        seed=args.seed,
        log_every=args.log_every,
    )
    images = None
    if args.images:
        files = _collect_images(args.images)
        images, _ = _load_inputs(files)
    result = run_demo(args.mode, arch, config, images)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i, label in enumerate(result.labels):
        save_png(result.images[i], out / f"original_{i + 1}_{label}.png")
        save_png(result.reconstructions[i], out / f"recon_{i + 1}_{label}.png")
        save_png(result.residuals[i], out / f"residual_{i + 1}_{label}.png")
    _write_json(result.summary(), str(out / "metrics.json"))
    for label, value in result.psnr_table.items():
        print(f"{label}: {value:.2f} dB")
    return 0


# ---------------------------------------------------------------------------
# Parser wiring
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="inrpack", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_train_flags(p):
        p.add_argument("--arch", type=_parse_arch, default=_parse_arch("l=8,n=112"),
                       help="network shape, e.g. l=8,n=112")
        p.add_argument("--epochs", type=int, default=5000)
        p.add_argument("--lr", type=float, default=1e-3)
        p.add_argument("--optimizer", choices=["adam", "plain-gd"], default="adam")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--log-every", type=int, default=100)

    p = sub.add_parser("compress", help="train a bundle from PNG images")
    p.add_argument("--images", nargs="+", required=True,
                   help="PNG files and/or directories of PNGs")
    p.add_argument("--n-weights", type=int, default=2, help="number of weight sets N")
    p.add_argument("--combiner", default="default",
                   help="'default' or a CSV file with M rows x N columns")
    p.add_argument("--gamma", default="uniform",
                   help="'uniform' or a CSV file with M loss weights")
    p.add_argument("--out", required=True, help="output bundle path")
    add_train_flags(p)
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("decompress", help="reconstruct PNGs from a bundle")
    p.add_argument("bundle")
    p.add_argument("--index", type=int, default=1, help="1-based image index")
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--all", action="store_true", help="write every image to --out dir")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_decompress)

    p = sub.add_parser("metrics", help="report PSNR/BPP for a bundle")
    p.add_argument("bundle")
    p.add_argument("--images", nargs="*", default=None,
                   help="original PNGs for PSNR (optional)")
    p.add_argument("--out", default=None, help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("sweep", help="rate-distortion sweep to CSV")
    p.add_argument("--images", required=True, help="directory of PNGs sharing dims")
    p.add_argument("--mode", choices=["vary-M", "vary-arch"], required=True)
    p.add_argument("--m-values", type=lambda s: [int(v) for v in s.split(",")],
                   default=None, help="comma list of M values (vary-M)")
    p.add_argument("--archs", type=lambda s: [_parse_arch(a) for a in s.split(";")],
                   default=None, help="semicolon list of l=..,n=.. (vary-arch)")
    p.add_argument("--n-weights", type=int, default=2)
    p.add_argument("--out", required=True, help="output CSV path")
    add_train_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify-bounds", help="check the convergence bounds numerically")
    p.add_argument("config", help="JSON config path")
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--out", default=None, help="write the full report JSON here")
    p.set_defaults(func=cmd_verify_bounds)

    p = sub.add_parser("demo", help="run one of the three showcase experiments")
    p.add_argument("mode", choices=list(DEMO_MODES))
    p.add_argument("--images", nargs="*", default=None,
                   help="override the built-in glyphs (2 or 3 PNGs)")
    p.add_argument("--out", required=True, help="output directory")
    add_train_flags(p)
    p.set_defaults(func=cmd_demo)
    # demo defaults differ from compress: small net, shorter run
    p.set_defaults(arch=_parse_arch("l=4,n=64"), epochs=2000, seed=42)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (
        DataError,
        BundleError,
        TrainingDivergedError,
        UnsupportedImageError,
        OSError,
        IndexError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except (UnsupportedCombinerError, convergence.ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
