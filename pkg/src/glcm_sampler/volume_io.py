"""Volume containers, loaders/writers and synthetic phantoms.

Two on-disk layouts are supported:

* an image stack: a directory of single-channel lossless rasters (PNG, TIFF,
  PGM), one file per slice, ordered by filename;
* a raw volume: a JSON header next to a contiguous binary blob stored
  slice-major, row-major, without padding.

Every volume is widened to ``uint16`` in memory.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np
from PIL import Image

IMAGE_SUFFIXES = (".png", ".tif", ".tiff", ".pgm", ".bmp")
DTYPES = {"u8": np.dtype(np.uint8), "u16": np.dtype(np.uint16)}
ENDIANNESS = {"little": "<", "big": ">"}


class VolumeError(ValueError):
    """Raised for malformed volumes, headers or image stacks."""


@dataclass(frozen=True, eq=False)
class Volume:
    """Ordered stack of grayscale slices, shape ``(n_slices, height, width)``.

    ``source_dtype`` records the on-disk sample width so that a volume read
    from an 8-bit source is written back as 8-bit.
    """

    id: str
    slices: np.ndarray
    global_range: tuple[int, int] = field(init=False)
    source_dtype: str = "u16"

    def __post_init__(self) -> None:
        arr = np.asarray(self.slices)
        if arr.ndim != 3:
            raise VolumeError(f"slices must be a 3-D array, got shape {arr.shape}")
        n, h, w = arr.shape
        if n < 1:
            raise VolumeError("volume must contain at least one slice")
        if h < 2 or w < 2:
            raise VolumeError(f"slices must be at least 2x2, got {h}x{w}")
        if arr.size and (arr.min() < 0 or arr.max() > 65535):
            raise VolumeError("intensities must lie in the unsigned 16-bit range")
        if self.source_dtype not in DTYPES:
            raise VolumeError(f"unknown dtype {self.source_dtype!r}")
        arr = np.array(arr, dtype=np.uint16, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "slices", arr)
        object.__setattr__(self, "global_range", (int(arr.min()), int(arr.max())))

    @property
    def n_slices(self) -> int:
        return self.slices.shape[0]

    @property
    def height(self) -> int:
        return self.slices.shape[1]

    @property
    def width(self) -> int:
        return self.slices.shape[2]

    @property
    def is_constant(self) -> bool:
        return self.global_range[0] == self.global_range[1]

    def same_content(self, other: "Volume") -> bool:
        """True when both volumes hold identical pixels (ids may differ)."""
        return (
            self.slices.shape == other.slices.shape
            and bool(np.array_equal(self.slices, other.slices))
            and self.global_range == other.global_range
        )


# ---------------------------------------------------------------------------
# image stacks


def _read_gray(path: Path) -> tuple[np.ndarray, str]:
    with Image.open(path) as img:
        mode = img.mode
        if mode == "L":
            return np.asarray(img, dtype=np.uint8), "u8"
        if mode in ("I;16", "I;16L", "I;16B", "I;16N"):
            return np.asarray(img).astype(np.uint16), "u16"
        if mode == "I":
            arr = np.asarray(img, dtype=np.int64)
            if arr.size and (arr.min() < 0 or arr.max() > 65535):
                raise VolumeError(f"{path.name}: 32-bit samples outside the 16-bit range")
            return arr.astype(np.uint16), "u16"
    raise VolumeError(f"{path.name}: not a grayscale image (mode {mode})")


def load_image_stack(dir_path: Union[str, Path], id: str | None = None,
                     workers: int = 1) -> Volume:
    """Load a directory of grayscale rasters; filenames sorted lexicographically."""
    dir_path = Path(dir_path)
    if not dir_path.is_dir():
        raise VolumeError(f"{dir_path}: not a directory")
    files = sorted(
        (p for p in dir_path.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES),
        key=lambda p: p.name,
    )
    if not files:
        raise VolumeError(f"{dir_path}: empty directory (no image files)")

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            decoded = list(pool.map(_read_gray, files))
    else:
        decoded = [_read_gray(p) for p in files]

    shape = decoded[0][0].shape
    for path, (arr, _) in zip(files, decoded):
        if arr.shape != shape:
            raise VolumeError(
                f"{path.name}: mixed dimensions ({arr.shape[1]}x{arr.shape[0]}"
                f" vs {shape[1]}x{shape[0]})"
            )
    dtype = "u16" if any(kind == "u16" for _, kind in decoded) else "u8"
    stack = np.stack([arr for arr, _ in decoded]).astype(np.uint16)
    return Volume(id=id or dir_path.name, slices=stack, source_dtype=dtype)


def list_slice_files(dir_path: Union[str, Path]) -> list[str]:
    """Filenames of an image stack in slice order."""
    return sorted(p.name for p in Path(dir_path).iterdir()
                  if p.suffix.lower() in IMAGE_SUFFIXES)


def write_image_stack(volume: Volume, dir_path: Union[str, Path],
                      prefix: str = "slice_") -> list[Path]:
    """Write one PNG per slice; names are zero-padded so lexicographic order holds."""
    dir_path = Path(dir_path)
    dir_path.mkdir(parents=True, exist_ok=True)
    digits = max(4, len(str(volume.n_slices - 1)))
    paths = []
    for i, sl in enumerate(volume.slices):
        if volume.source_dtype == "u8" and volume.global_range[1] <= 255:
            img = Image.fromarray(sl.astype(np.uint8))
        else:
            img = Image.fromarray(sl.astype(np.uint16))
        path = dir_path / f"{prefix}{i:0{digits}d}.png"
        img.save(path)
        paths.append(path)
    return paths


# ---------------------------------------------------------------------------
# raw volumes


def _parse_header(header_path: Path) -> dict:
    try:
        header = json.loads(header_path.read_text())
    except json.JSONDecodeError as exc:
        raise VolumeError(f"{header_path.name}: invalid header ({exc})") from None
    missing = [k for k in ("width", "height", "n_slices", "dtype", "data_file")
               if k not in header]
    if missing:
        raise VolumeError(f"{header_path.name}: missing keys {', '.join(missing)}")
    if header["dtype"] not in DTYPES:
        raise VolumeError(f"unknown dtype {header['dtype']!r} (expected u8 or u16)")
    endianness = header.get("endianness", "little")
    if endianness not in ENDIANNESS:
        raise VolumeError(f"unknown endianness {endianness!r}")
    header["endianness"] = endianness
    return header


def load_raw_volume(header_path: Union[str, Path], id: str | None = None) -> Volume:
    header_path = Path(header_path)
    header = _parse_header(header_path)
    w, h, n = int(header["width"]), int(header["height"]), int(header["n_slices"])
    dtype = DTYPES[header["dtype"]].newbyteorder(ENDIANNESS[header["endianness"]])
    blob_path = header_path.parent / header["data_file"]
    data = blob_path.read_bytes()
    expected = w * h * n * dtype.itemsize
    if len(data) != expected:
        raise VolumeError(f"size mismatch: expected {expected}, got {len(data)}")
    arr = np.frombuffer(data, dtype=dtype).reshape(n, h, w)
    vol_id = id or header.get("id") or header_path.stem
    return Volume(id=vol_id, slices=arr, source_dtype=header["dtype"])


def write_raw_volume(volume: Volume, header_path: Union[str, Path],
                     dtype: str | None = None, endianness: str = "little") -> Path:
    """Write ``volume`` as header + blob; returns the blob path.

    The blob is named after the header stem with a ``.raw`` suffix.
    """
    header_path = Path(header_path)
    dtype = dtype or volume.source_dtype
    if dtype not in DTYPES:
        raise VolumeError(f"unknown dtype {dtype!r}")
    if dtype == "u8" and volume.global_range[1] > 255:
        raise VolumeError("volume does not fit in u8")
    np_dtype = DTYPES[dtype].newbyteorder(ENDIANNESS[endianness])
    blob_path = header_path.with_suffix(".raw")
    header = {
        "id": volume.id,
        "width": volume.width,
        "height": volume.height,
        "n_slices": volume.n_slices,
        "dtype": dtype,
        "endianness": endianness,
        "data_file": blob_path.name,
    }
    header_path.parent.mkdir(parents=True, exist_ok=True)
    blob_path.write_bytes(volume.slices.astype(np_dtype).tobytes(order="C"))
    header_path.write_text(json.dumps(header, indent=2) + "\n")
    return blob_path


def load_volume(path: Union[str, Path], id: str | None = None) -> Volume:
    """Dispatch on path kind: directory -> image stack, file -> raw header."""
    path = Path(path)
    if path.is_dir():
        return load_image_stack(path, id=id)
    if path.is_file():
        return load_raw_volume(path, id=id)
    raise VolumeError(f"{path}: no such file or directory")


# ---------------------------------------------------------------------------
# phantoms


@dataclass(frozen=True)
class Constant:
    pass


@dataclass(frozen=True)
class Checker:
    """Two-level checkerboard with square cells of ``period`` pixels."""

    period: int = 1
    amplitude: int = 1000


@dataclass(frozen=True)
class Noise:
    """Uniform integer noise in ``[base, base + amplitude]`` drawn per band."""

    seed: int = 0
    amplitude: int = 100


Texture = Union[Constant, Checker, Noise]


@dataclass(frozen=True)
class PhantomSpec:
    width: int
    height: int
    band_lengths: Sequence[int]
    band_textures: Sequence[Texture]
    base_intensity: int = 1000

    def validate(self) -> None:
        if self.width < 2 or self.height < 2:
            raise VolumeError("phantom width and height must be >= 2")
        if not self.band_lengths:
            raise VolumeError("phantom needs at least one band")
        if len(self.band_lengths) != len(self.band_textures):
            raise VolumeError("band_lengths and band_textures differ in length")
        if any(int(n) < 1 for n in self.band_lengths):
            raise VolumeError("every band length must be >= 1")
        for tex in self.band_textures:
            if isinstance(tex, Checker) and tex.period < 1:
                raise VolumeError("checker period must be >= 1")
            if isinstance(tex, (Checker, Noise)) and tex.amplitude < 0:
                raise VolumeError("texture amplitude must be >= 0")
            if not isinstance(tex, (Constant, Checker, Noise)):
                raise VolumeError(f"unknown texture {tex!r}")
        top = self.base_intensity + max(
            (getattr(t, "amplitude", 0) for t in self.band_textures), default=0)
        if self.base_intensity < 0 or top > 65535:
            raise VolumeError("phantom intensities exceed the 16-bit range")


def _band(tex: Texture, n: int, h: int, w: int, base: int) -> np.ndarray:
    if isinstance(tex, Constant):
        return np.full((n, h, w), base, dtype=np.uint16)
    if isinstance(tex, Checker):
        yy, xx = np.indices((h, w))
        cells = ((yy // tex.period) + (xx // tex.period)) % 2
        sl = (base + cells * tex.amplitude).astype(np.uint16)
        return np.broadcast_to(sl, (n, h, w)).copy()
    rng = np.random.default_rng(tex.seed)
    noise = rng.integers(0, tex.amplitude, size=(n, h, w), endpoint=True)
    return (base + noise).astype(np.uint16)


def generate_phantom(spec: PhantomSpec, id: str = "phantom") -> Volume:
    """Stack bands of synthetic texture. Each noise band reseeds its own generator."""
    spec.validate()
    bands = [
        _band(tex, int(n), spec.height, spec.width, spec.base_intensity)
        for n, tex in zip(spec.band_lengths, spec.band_textures)
    ]
    return Volume(id=id, slices=np.concatenate(bands, axis=0))


def band_boundaries(spec: PhantomSpec) -> list[int]:
    """Index of the first slice of every band after the first."""
    return [int(b) for b in np.cumsum(spec.band_lengths)[:-1]]
