"""Per-slice lung-fraction curation and a classical fallback lung segmenter."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from scipy import ndimage

from .glcm import quantize
from .volume_io import Volume, load_image_stack

DEFAULT_THRESHOLD = 0.05
# fractions swept when choosing the lung-area cutoff; 5% performed best
THRESHOLD_PRESETS = (0.005, 0.01, 0.02, 0.03, 0.04, 0.05)
MIN_COMPONENT_FRACTION = 0.005

_FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


class CurationError(ValueError):
    pass


@dataclass(frozen=True)
class ManifestEntry:
    slice_index: int
    lung_fraction: float
    kept: bool
    mask_source: str  # "external" | "fallback"


@dataclass(frozen=True)
class CurationManifest:
    volume_id: str
    threshold_fraction: float
    entries: tuple[ManifestEntry, ...]

    def kept_indices(self) -> list[int]:
        return [e.slice_index for e in self.entries if e.kept]

    @property
    def n_kept(self) -> int:
        return sum(e.kept for e in self.entries)

    def to_dict(self) -> dict:
        return {
            "volume_id": self.volume_id,
            "threshold_fraction": self.threshold_fraction,
            "n_slices": len(self.entries),
            "n_kept": self.n_kept,
            "entries": [
                {
                    "slice_index": e.slice_index,
                    "lung_fraction": e.lung_fraction,
                    "kept": e.kept,
                    "mask_source": e.mask_source,
                }
                for e in self.entries
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "CurationManifest":
        try:
            threshold = float(d["threshold_fraction"])
            entries = tuple(
                ManifestEntry(int(e["slice_index"]), float(e["lung_fraction"]),
                              bool(e["kept"]), str(e["mask_source"]))
                for e in d["entries"]
            )
            manifest = cls(str(d["volume_id"]), threshold, entries)
        except (KeyError, TypeError, ValueError) as exc:
            raise CurationError(f"malformed manifest: {exc}") from None
        if [e.slice_index for e in entries] != list(range(len(entries))):
            raise CurationError("manifest entries must cover slices 0..n-1 in order")
        for e in entries:
            if e.kept != (e.lung_fraction >= threshold):
                raise CurationError(f"slice {e.slice_index}: kept flag contradicts threshold")
        return manifest


def write_manifest(manifest: CurationManifest, path: Union[str, Path]) -> None:
    Path(path).write_text(manifest.to_json())


def read_manifest(path: Union[str, Path]) -> CurationManifest:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise CurationError(f"{Path(path).name}: invalid JSON ({exc})") from None
    return CurationManifest.from_dict(data)


def lung_fraction(mask: np.ndarray) -> float:
    mask = np.asarray(mask, dtype=bool)
    if mask.size == 0:
        raise CurationError("mask is empty")
    return int(np.count_nonzero(mask)) / mask.size


def connected_components(binary: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """4-connected labeling. Returns ``(labels, areas)`` with ``areas[k-1]`` the size of label k."""
    labels, n = ndimage.label(np.asarray(binary, dtype=bool), structure=_FOUR_CONNECTED)
    areas = np.bincount(labels.ravel(), minlength=n + 1)[1:]
    return labels, areas


def _between_class_variance(hist: np.ndarray) -> np.ndarray:
    hist = hist.astype(np.float64)
    bins = np.arange(len(hist), dtype=np.float64)
    w0 = np.cumsum(hist)
    s0 = np.cumsum(hist * bins)
    total, total_s = w0[-1], s0[-1]
    w1 = total - w0
    with np.errstate(divide="ignore", invalid="ignore"):
        mu0 = s0 / w0
        mu1 = (total_s - s0) / w1
        var = w0 * w1 * (mu0 - mu1) ** 2 / total**2
    return np.where((w0 > 0) & (w1 > 0), var, 0.0)


def otsu_threshold(histogram: Sequence[int]) -> int:
    """Otsu level t over 256 bins; the dark class is bins ``0..t``.

    Exhaustive scan, ties resolved to the smallest t.
    """
    hist = np.asarray(histogram)
    if hist.shape != (256,):
        raise CurationError(f"histogram must have 256 bins, got {hist.shape}")
    if np.any(hist < 0) or hist.sum() <= 0:
        raise CurationError("histogram is empty")
    var = _between_class_variance(hist)
    # float sums can differ in the last bits for mathematically tied t
    best = var.max()
    return int(np.flatnonzero(var >= best * (1 - 1e-12))[0])


def fallback_lung_mask(slice_: np.ndarray, global_range: tuple[int, int]) -> np.ndarray:
    """Dark, interior, not-too-small regions of a slice.

    Rescale to 256 levels over ``global_range``, Otsu-threshold, keep the dark
    class, drop 4-connected components that touch the border or cover less
    than 0.5% of the frame. Slices with no bimodal split give an empty mask.
    """
    sl = np.asarray(slice_)
    if sl.ndim != 2 or min(sl.shape) < 2:
        raise CurationError("slice must be 2-D and at least 2x2")
    levels = quantize(sl, global_range[0], global_range[1], 256)
    hist = np.bincount(levels.ravel(), minlength=256)
    if _between_class_variance(hist).max() <= 0:
        return np.zeros(sl.shape, dtype=bool)
    t = otsu_threshold(hist)
    labels, areas = connected_components(levels <= t)
    if len(areas) == 0:
        return np.zeros(sl.shape, dtype=bool)
    border = np.unique(np.concatenate(
        [labels[0], labels[-1], labels[:, 0], labels[:, -1]]))
    keep = areas >= MIN_COMPONENT_FRACTION * sl.size
    keep[border[border > 0] - 1] = False
    lut = np.concatenate([[False], keep])
    return lut[labels]


def load_masks(dir_path: Union[str, Path]) -> list[np.ndarray]:
    """External masks: an image stack where nonzero pixels mark lung."""
    vol = load_image_stack(dir_path, id="masks")
    return [sl > 0 for sl in vol.slices]


def curate_volume(volume: Volume, masks: Optional[Sequence[np.ndarray]] = None,
                  threshold_fraction: float = DEFAULT_THRESHOLD) -> CurationManifest:
    """Keep slices whose lung fraction is at least ``threshold_fraction``."""
    if not 0.0 <= threshold_fraction <= 1.0:
        raise CurationError("threshold must be in [0,1]")
    if masks is not None:
        if len(masks) != volume.n_slices:
            raise CurationError(
                f"mask count mismatch: {len(masks)} masks for {volume.n_slices} slices")
        for i, m in enumerate(masks):
            if np.shape(m) != (volume.height, volume.width):
                raise CurationError(
                    f"mask {i}: dimension mismatch {np.shape(m)} vs "
                    f"{(volume.height, volume.width)}")
        source = "external"
    else:
        masks = [fallback_lung_mask(sl, volume.global_range) for sl in volume.slices]
        source = "fallback"
    entries = []
    for i, m in enumerate(masks):
        frac = lung_fraction(m)
        entries.append(ManifestEntry(i, frac, frac >= threshold_fraction, source))
    return CurationManifest(volume.id, float(threshold_fraction), tuple(entries))

