"""Gray-level co-occurrence matrices and per-slice GLCM entropy."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Optional, Union

import numpy as np

from .volume_io import Volume

if TYPE_CHECKING:
    from .curation import CurationManifest

RANGE_MODES = ("global", "per_slice")


@dataclass(frozen=True)
class GlcmConfig:
    levels: int = 32
    offset: tuple[int, int] = (1, 0)
    symmetric: bool = True
    range_mode: str = "global"

    def validate(self, width: int | None = None, height: int | None = None) -> None:
        if self.levels < 2:
            raise ValueError("levels must be >= 2")
        dx, dy = self.offset
        if (dx, dy) == (0, 0):
            raise ValueError("offset must not be (0, 0)")
        if self.range_mode not in RANGE_MODES:
            raise ValueError(f"range_mode must be one of {RANGE_MODES}")
        if width is not None and abs(dx) >= width:
            raise ValueError(f"|dx|={abs(dx)} must be smaller than width {width}")
        if height is not None and abs(dy) >= height:
            raise ValueError(f"|dy|={abs(dy)} must be smaller than height {height}")


@dataclass(frozen=True, eq=False)
class Glcm:
    levels: int
    p: np.ndarray


def quantize(slice_: np.ndarray, lo: int, hi: int, levels: int) -> np.ndarray:
    """Map intensities to ``levels`` equal-width bins over ``[lo, hi]``.

    ``level(v) = min(L-1, floor((v - lo) * L / (hi - lo + 1)))``, with values
    outside the range clamped. A degenerate range maps everything to 0.
    """
    lo, hi = int(lo), int(hi)
    if hi < lo:
        raise ValueError(f"empty range ({lo}, {hi})")
    if levels < 2:
        raise ValueError("levels must be >= 2")
    v = np.asarray(slice_, dtype=np.int64)
    if hi == lo:
        return np.zeros(v.shape, dtype=np.int64)
    v = np.clip(v, lo, hi) - lo
    return np.minimum(levels - 1, (v * levels) // (hi - lo + 1))


def _pair_views(levels_grid: np.ndarray, dx: int, dy: int) -> tuple[np.ndarray, np.ndarray]:
    h, w = levels_grid.shape
    if abs(dx) >= w or abs(dy) >= h:
        raise ValueError(f"offset ({dx}, {dy}) exceeds grid extent {w}x{h}: no valid pairs")
    ys = slice(max(0, -dy), h - max(0, dy))
    xs = slice(max(0, -dx), w - max(0, dx))
    yt = slice(max(0, dy), h + min(0, dy))
    xt = slice(max(0, dx), w + min(0, dx))
    return levels_grid[ys, xs], levels_grid[yt, xt]


def cooccurrence_counts(levels_grid: np.ndarray, offset: tuple[int, int],
                        levels: int, symmetric: bool = True) -> np.ndarray:
    """Integer co-occurrence counts ``c[a, b]`` for pixel pairs (q, q + offset).

    ``offset = (dx, dy)``: dx moves along columns, dy down the rows.
    """
    src, dst = _pair_views(np.asarray(levels_grid), int(offset[0]), int(offset[1]))
    idx = src.astype(np.int64).ravel() * levels + dst.astype(np.int64).ravel()
    counts = np.bincount(idx, minlength=levels * levels).reshape(levels, levels)
    if symmetric:
        counts = counts + counts.T
    return counts


def cooccurrence(levels_grid: np.ndarray, offset: tuple[int, int] = (1, 0),
                 symmetric: bool = True, levels: int | None = None) -> Glcm:
    grid = np.asarray(levels_grid)
    if levels is None:
        levels = max(2, int(grid.max()) + 1)
    if grid.size and (grid.min() < 0 or grid.max() >= levels):
        raise ValueError(f"grid levels must lie in [0, {levels - 1}]")
    counts = cooccurrence_counts(grid, offset, levels, symmetric)
    return Glcm(levels=levels, p=counts / counts.sum())


def glcm_entropy(glcm: Union[Glcm, np.ndarray]) -> float:
    """Shannon entropy (nats) of a normalized GLCM; empty cells contribute 0."""
    p = np.asarray(glcm.p if isinstance(glcm, Glcm) else glcm, dtype=np.float64)
    nz = p[p > 0]
    h = 0.0 - float(np.sum(nz * np.log(nz)))
    # rounding can push past the analytic bounds [0, ln(#cells)]
    return min(max(h, 0.0), math.log(p.size))


def slice_entropy(slice_: np.ndarray, lo: int, hi: int, config: GlcmConfig) -> float:
    q = quantize(slice_, lo, hi, config.levels)
    counts = cooccurrence_counts(q, config.offset, config.levels, config.symmetric)
    return glcm_entropy(counts / counts.sum())


@dataclass(frozen=True, eq=False)
class EntropyProfile:
    volume_id: str
    values: np.ndarray
    slice_indices: np.ndarray
    config: Optional[GlcmConfig] = None
    smoothed: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        idx = np.asarray(self.slice_indices, dtype=np.int64)
        if values.ndim != 1 or idx.ndim != 1 or len(values) != len(idx):
            raise ValueError("values and slice_indices must be 1-D of equal length")
        if len(values) < 1:
            raise ValueError("entropy profile must contain at least one slice")
        if np.any(np.diff(idx) <= 0):
            raise ValueError("slice_indices must be strictly ascending")
        if not np.all(np.isfinite(values)):
            raise ValueError("entropy values must be finite")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "slice_indices", idx)
        if self.smoothed is not None:
            sm = np.asarray(self.smoothed, dtype=np.float64)
            if sm.shape != values.shape:
                raise ValueError("smoothed column length differs from values")
            object.__setattr__(self, "smoothed", sm)

    def __len__(self) -> int:
        return len(self.values)

    def with_smoothed(self, smoothed: Iterable[float]) -> "EntropyProfile":
        return EntropyProfile(self.volume_id, self.values, self.slice_indices,
                              self.config, np.asarray(list(smoothed), dtype=np.float64))


def entropy_profile(volume: Volume, manifest: "CurationManifest | None" = None,
                    config: GlcmConfig = GlcmConfig(), workers: int = 1) -> EntropyProfile:
    """Per-slice GLCM entropy over the slices kept by ``manifest``.

    Without a manifest every slice is used. ``workers > 1`` spreads slices over
    a thread pool; results are identical to the sequential path.
    """
    config.validate(volume.width, volume.height)
    if manifest is None:
        kept = list(range(volume.n_slices))
    else:
        if manifest.volume_id != volume.id or len(manifest.entries) != volume.n_slices:
            raise ValueError("manifest does not match volume")
        kept = manifest.kept_indices()
    if not kept:
        raise ValueError("no kept slices: entropy profile would be empty")

    def one(i: int) -> float:
        sl = volume.slices[i]
        if config.range_mode == "global":
            lo, hi = volume.global_range
        else:
            lo, hi = int(sl.min()), int(sl.max())
        return slice_entropy(sl, lo, hi, config)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(one, kept))
    else:
        values = [one(i) for i in kept]
    return EntropyProfile(volume.id, np.array(values), np.array(kept), config)


# ---------------------------------------------------------------------------
# CSV


def profile_to_csv(profile: EntropyProfile) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if profile.smoothed is None:
        writer.writerow(["slice_index", "entropy_nats"])
        for i, v in zip(profile.slice_indices, profile.values):
            writer.writerow([int(i), f"{v:.17g}"])
    else:
        writer.writerow(["slice_index", "entropy_nats", "smoothed_nats"])
        for i, v, s in zip(profile.slice_indices, profile.values, profile.smoothed):
            writer.writerow([int(i), f"{v:.17g}", f"{s:.17g}"])
    return buf.getvalue()


def write_profile_csv(profile: EntropyProfile, path: Union[str, Path]) -> None:
    Path(path).write_text(profile_to_csv(profile))


def read_profile_csv(path: Union[str, Path], volume_id: str | None = None) -> EntropyProfile:
    path = Path(path)
    rows = list(csv.reader(io.StringIO(path.read_text())))
    if not rows:
        raise ValueError(f"{path.name}: empty profile file")
    header = [c.strip() for c in rows[0]]
    if header not in (["slice_index", "entropy_nats"],
                      ["slice_index", "entropy_nats", "smoothed_nats"]):
        raise ValueError(f"{path.name}: unexpected header {','.join(header)}")
    body = [r for r in rows[1:] if r]
    if not body:
        raise ValueError(f"{path.name}: profile has no rows")
    try:
        idx = [int(r[0]) for r in body]
        values = [float(r[1]) for r in body]
        smoothed = [float(r[2]) for r in body] if len(header) == 3 else None
    except (ValueError, IndexError) as exc:
        raise ValueError(f"{path.name}: malformed row ({exc})") from None
    return EntropyProfile(volume_id or path.stem, values, idx, None, smoothed)


def config_dict(config: GlcmConfig) -> dict:
    d = asdict(config)
    d["offset"] = list(config.offset)
    return d
