"""Command-line entry point: ``glcm-sampler <subcommand> ...``.

Exit status is 0 on success and 2 on usage or input errors; diagnostics go to
stderr as one line, summaries to stdout, data to files.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import curation, glcm, metrics, sampler, smoothing, volume_io
from .plotting import render_profile_svg


class UsageError(Exception):
    pass


def _offset(text: str) -> tuple[int, int]:
    try:
        dx, dy = (int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("offset must look like dx,dy") from None
    return dx, dy


def _threshold_text(t: float) -> str:
    return f"{t * 100:g}%"


def _glcm_config(args) -> glcm.GlcmConfig:
    cfg = glcm.GlcmConfig(levels=args.levels, offset=args.offset,
                          symmetric=args.symmetric, range_mode=args.range_mode)
    try:
        cfg.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return cfg


def _sampling_config(args) -> sampler.SamplingConfig:
    cfg = sampler.SamplingConfig(
        n_samples=args.n, strategy=args.strategy,
        sg=smoothing.SgConfig(args.sg_window, args.sg_order),
        quantile_mode=args.quantile_mode, seed=args.seed,
        allow_duplicates=args.allow_duplicates)
    try:
        cfg.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return cfg


def _resolve_threshold(args) -> float:
    t = args.threshold
    if args.preset is not None:
        t = float(args.preset) / 100
    if not 0.0 <= t <= 1.0:
        raise UsageError("threshold must be in [0,1]")
    return t


def _curate(args) -> tuple[volume_io.Volume, curation.CurationManifest]:
    threshold = _resolve_threshold(args)
    if not args.volume:
        raise UsageError("--volume is required")
    volume = volume_io.load_volume(args.volume)
    masks = curation.load_masks(args.masks) if args.masks else None
    return volume, curation.curate_volume(volume, masks, threshold)


def _profile(volume, manifest, args) -> glcm.EntropyProfile:
    profile = glcm.entropy_profile(volume, manifest, _glcm_config(args), workers=args.workers)
    if args.sg_window is not None:
        sg = smoothing.SgConfig(args.sg_window, args.sg_order)
        try:
            sg.validate()
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        profile = profile.with_smoothed(smoothing.sg_smooth(profile.values, sg))
    return profile


def _profile_for_sampling(profile: glcm.EntropyProfile) -> glcm.EntropyProfile:
    return glcm.EntropyProfile(profile.volume_id, profile.values, profile.slice_indices,
                               profile.config)


# ---------------------------------------------------------------------------
# subcommands


def cmd_curate(args) -> int:
    volume, manifest = _curate(args)
    curation.write_manifest(manifest, args.out)
    print(f"kept {manifest.n_kept} of {volume.n_slices} slices "
          f"(threshold {_threshold_text(manifest.threshold_fraction)})")
    return 0


def cmd_profile(args) -> int:
    volume = volume_io.load_volume(args.volume)
    manifest = curation.read_manifest(args.manifest) if args.manifest else None
    profile = _profile(volume, manifest, args)
    glcm.write_profile_csv(profile, args.out)
    print(f"wrote entropy profile for {len(profile)} slices")
    return 0


def cmd_sample(args) -> int:
    profile = glcm.read_profile_csv(args.profile, volume_id=args.volume_id)
    plan = sampler.sample_profile(_profile_for_sampling(profile), _sampling_config(args))
    sampler.write_plan(plan, args.out)
    flag = " (degenerate)" if plan.degenerate else ""
    print(f"selected {len(plan.selected)} of {len(profile)} slices{flag}")
    return 0


def cmd_plot(args) -> int:
    profile = glcm.read_profile_csv(args.profile)
    plan = sampler.read_plan(args.plan) if args.plan else None
    Path(args.out).write_text(render_profile_svg(profile, plan, title=args.title))
    return 0


def _parse_bands(text: str, default_seed: int, checker_amplitude: int):
    lengths, textures = [], []
    for part in (p.strip() for p in text.split(",")):
        if not part:
            continue
        fields = part.split(":")
        try:
            n = int(fields[0])
            kind = fields[1]
            params = [int(f) for f in fields[2:]]
        except (ValueError, IndexError):
            raise UsageError(f"bad band {part!r}; expected LEN:KIND[:PARAMS]") from None
        if kind == "constant" and not params:
            tex = volume_io.Constant()
        elif kind == "checker" and len(params) <= 1:
            tex = volume_io.Checker(params[0] if params else 1, checker_amplitude)
        elif kind == "noise" and len(params) <= 2:
            amp = params[0] if params else 100
            seed = params[1] if len(params) == 2 else default_seed
            tex = volume_io.Noise(seed, amp)
        else:
            raise UsageError(f"bad band {part!r}; kinds are constant, checker[:PERIOD], "
                             "noise[:AMPLITUDE[:SEED]]")
        lengths.append(n)
        textures.append(tex)
    if not lengths:
        raise UsageError("--bands must list at least one band")
    return lengths, textures


def cmd_phantom(args) -> int:
    lengths, textures = _parse_bands(args.bands, args.seed, args.contrast)
    spec = volume_io.PhantomSpec(args.width, args.height, lengths, textures, args.base)
    vol = volume_io.generate_phantom(spec, id=args.id or Path(args.out).stem)
    volume_io.write_raw_volume(vol, args.out)
    print(f"wrote {vol.n_slices}-slice phantom {vol.width}x{vol.height}")
    return 0


def _read_pairs(path: Path) -> tuple[list[int], list[int]]:
    preds, labels = [], []
    for lineno, line in enumerate(path.read_text().splitlines(), 1):
        fields = line.replace(",", " ").split()
        if not fields or fields[0].startswith("#"):
            continue
        try:
            p, y = int(fields[0]), int(fields[1])
        except (ValueError, IndexError):
            if lineno == 1:
                continue  # header
            raise UsageError(f"{path.name}:{lineno}: expected 'prediction,label'") from None
        preds.append(p)
        labels.append(y)
    return preds, labels


def cmd_score(args) -> int:
    preds, labels = _read_pairs(Path(args.input))
    c = metrics.confusion(preds, labels)
    print(f"macro_f1 {metrics.as_percent(metrics.macro_f1(c))}")
    print(f"sensitivity {metrics.as_percent(metrics.sensitivity(c))}")
    print(f"specificity {metrics.as_percent(metrics.specificity(c))}")
    return 0


def cmd_pipeline(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sampling = _sampling_config(args)
    volume, manifest = _curate(args)
    curation.write_manifest(manifest, out / "manifest.json")
    if manifest.n_kept == 0:
        raise UsageError("no slices survive curation; lower --threshold")
    profile = _profile(volume, manifest, args)
    glcm.write_profile_csv(profile, out / "profile.csv")
    plan = sampler.sample_profile(_profile_for_sampling(profile), sampling)
    sampler.write_plan(plan, out / "plan.json")
    (out / "plot.svg").write_text(render_profile_svg(profile, plan, title=volume.id))
    print(f"kept {manifest.n_kept} of {volume.n_slices} slices "
          f"(threshold {_threshold_text(manifest.threshold_fraction)}); "
          f"selected {len(plan.selected)}")
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_curation_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--volume", help="raw header file or image-stack directory")
    p.add_argument("--masks", help="image-stack directory of lung masks (nonzero = lung)")
    p.add_argument("--threshold", type=float, default=curation.DEFAULT_THRESHOLD,
                   help="minimum lung fraction to keep a slice (default 0.05)")
    p.add_argument("--preset", choices=["0.5", "1", "2", "3", "4", "5"],
                   help="threshold preset in percent; overrides --threshold")


def _add_glcm_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--levels", type=int, default=32)
    p.add_argument("--offset", type=_offset, default=(1, 0), help="dx,dy (default 1,0)")
    p.add_argument("--symmetric", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--range-mode", choices=glcm.RANGE_MODES, default="global")
    p.add_argument("--workers", type=int, default=1)


def _add_sampling_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--strategy", choices=sampler.STRATEGIES, default="glcm")
    p.add_argument("--n", type=int, default=16, help="number of slices to select")
    p.add_argument("--sg-window", type=int, default=3)
    p.add_argument("--sg-order", type=int, default=2)
    p.add_argument("--quantile-mode", choices=sampler.QUANTILE_MODES, default="midpoint")
    p.add_argument("--seed", type=int)
    p.add_argument("--allow-duplicates", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="glcm-sampler",
        description="Lung-fraction curation and GLCM-entropy slice sampling for CT volumes")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curate", help="per-slice lung-fraction curation")
    _add_curation_flags(p)
    p.add_argument("--out", default="manifest.json")
    p.set_defaults(func=cmd_curate)

    p = sub.add_parser("profile", help="per-slice GLCM entropy profile")
    p.add_argument("--volume", required=True)
    p.add_argument("--manifest", help="curation manifest; all slices when omitted")
    _add_glcm_flags(p)
    p.add_argument("--sg-window", type=int, help="also write a smoothed column")
    p.add_argument("--sg-order", type=int, default=2)
    p.add_argument("--out", default="profile.csv")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("sample", help="build a sampling plan from a profile")
    p.add_argument("--profile", required=True)
    p.add_argument("--volume-id", help="defaults to the profile file stem")
    _add_sampling_flags(p)
    p.add_argument("--out", default="plan.json")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("plot", help="render a profile (and plan) as SVG")
    p.add_argument("--profile", required=True)
    p.add_argument("--plan")
    p.add_argument("--title")
    p.add_argument("--out", default="profile.svg")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("phantom", help="write a synthetic banded volume")
    p.add_argument("--bands", required=True,
                   help="comma list of LEN:constant | LEN:checker[:PERIOD] | "
                        "LEN:noise[:AMPLITUDE[:SEED]]")
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--height", type=int, default=64)
    p.add_argument("--base", type=int, default=1000)
    p.add_argument("--contrast", type=int, default=1000, help="checker amplitude")
    p.add_argument("--seed", type=int, default=0, help="default noise seed")
    p.add_argument("--id")
    p.add_argument("--out", default="phantom.json", help="header path; blob goes to .raw")
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("score", help="macro F1, sensitivity, specificity in percent")
    p.add_argument("--input", required=True, help="two columns: prediction,label (1 = COVID)")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("pipeline", help="curate, profile, sample and plot in one go")
    _add_curation_flags(p)
    _add_glcm_flags(p)
    _add_sampling_flags(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError, ZeroDivisionError, OSError) as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
