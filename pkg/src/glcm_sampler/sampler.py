"""Entropy-driven inverse-CDF slice sampling and baseline samplers.

The GLCM strategy smooths the entropy profile, takes absolute first
differences, normalizes them into weights, accumulates a CDF and inverts it
at N quantiles. Weight ``w[k] = |e[k+1] - e[k]|`` is attached to curated
slot ``k``, so a CDF hit at index ``k`` selects the k-th curated slice.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .glcm import EntropyProfile
from .smoothing import SgConfig, sg_smooth

STRATEGIES = ("glcm", "center", "uniform")
QUANTILE_MODES = ("midpoint", "seeded")


@dataclass(frozen=True)
class SamplingConfig:
    n_samples: int = 16
    strategy: str = "glcm"
    sg: SgConfig = field(default_factory=SgConfig)
    quantile_mode: str = "midpoint"
    seed: Optional[int] = None
    allow_duplicates: bool = False

    def validate(self) -> None:
        if self.n_samples < 1:
            raise ValueError("n must be ≥ 1")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {', '.join(STRATEGIES)}")
        if self.quantile_mode not in QUANTILE_MODES:
            raise ValueError(f"quantile_mode must be one of {', '.join(QUANTILE_MODES)}")
        if self.quantile_mode == "seeded" and self.seed is None:
            raise ValueError("seeded quantile mode needs a seed")
        if self.strategy == "glcm":
            self.sg.validate()


@dataclass(frozen=True, eq=False)
class SamplingPlan:
    volume_id: str
    strategy: str
    selected: list[int]
    weights: np.ndarray
    cdf: np.ndarray
    degenerate: bool
    config: SamplingConfig
    # raw inverse-CDF hits as slice indices, in quantile order, before dedupe
    draws: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        cfg = self.config
        return {
            "volume_id": self.volume_id,
            "strategy": self.strategy,
            "config": {
                "n_samples": cfg.n_samples,
                "sg_window": cfg.sg.window,
                "sg_order": cfg.sg.order,
                "quantile_mode": cfg.quantile_mode,
                "seed": cfg.seed,
                "allow_duplicates": cfg.allow_duplicates,
            },
            "degenerate": self.degenerate,
            "selected": [int(i) for i in self.selected],
            "draws": [int(i) for i in self.draws],
            "weights": [float(w) for w in self.weights],
            "cdf": [float(f) for f in self.cdf],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "SamplingPlan":
        try:
            c = d["config"]
            config = SamplingConfig(
                n_samples=int(c["n_samples"]),
                strategy=str(d["strategy"]),
                sg=SgConfig(int(c["sg_window"]), int(c["sg_order"])),
                quantile_mode=str(c["quantile_mode"]),
                seed=None if c["seed"] is None else int(c["seed"]),
                allow_duplicates=bool(c["allow_duplicates"]),
            )
            return cls(
                volume_id=str(d["volume_id"]),
                strategy=config.strategy,
                selected=[int(i) for i in d["selected"]],
                weights=np.asarray(d["weights"], dtype=np.float64),
                cdf=np.asarray(d["cdf"], dtype=np.float64),
                degenerate=bool(d["degenerate"]),
                config=config,
                draws=[int(i) for i in d.get("draws", [])],
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed plan: {exc}") from None


def write_plan(plan: SamplingPlan, path: Union[str, Path]) -> None:
    Path(path).write_text(plan.to_json())


def read_plan(path: Union[str, Path]) -> SamplingPlan:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{Path(path).name}: invalid JSON ({exc})") from None
    return SamplingPlan.from_dict(data)


def diff_abs_normalize(smoothed: Sequence[float]) -> tuple[np.ndarray, bool]:
    """Normalized absolute first differences; ``(weights, degenerate)``.

    A flat sequence has no derivative mass and falls back to uniform weights
    with ``degenerate=True``.
    """
    e = np.asarray(smoothed, dtype=np.float64)
    if e.ndim != 1 or len(e) < 2:
        raise ValueError("need at least 2 values to differentiate")
    d = np.abs(np.diff(e))
    total = d.sum()
    if total > 0:
        return d / total, False
    return np.full(len(d), 1.0 / len(d)), True


def build_cdf(weights: Sequence[float]) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or len(w) < 1:
        raise ValueError("weights must be a non-empty 1-D sequence")
    if np.any(w < 0):
        raise ValueError("negative weight")
    if abs(w.sum() - 1.0) > 1e-9:
        raise ValueError(f"weights must sum to 1, got {w.sum()!r}")
    cdf = np.cumsum(w)
    cdf[-1] = 1.0
    return np.minimum(cdf, 1.0)


def inverse_cdf_sample(cdf: Sequence[float], quantiles: Sequence[float]) -> np.ndarray:
    """Smallest index k with ``cdf[k] >= u`` for each quantile, in input order."""
    cdf = np.asarray(cdf, dtype=np.float64)
    u = np.asarray(quantiles, dtype=np.float64)
    if np.any((u <= 0) | (u >= 1)):
        raise ValueError("quantiles must lie in the open interval (0, 1)")
    pos = np.searchsorted(cdf, u, side="left")
    return np.minimum(pos, len(cdf) - 1)


def midpoint_quantiles(n: int) -> np.ndarray:
    return (np.arange(n) + 0.5) / n


def seeded_quantiles(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.uniform(np.nextafter(0.0, 1.0), 1.0, size=n)


def _dedupe_backfill(hits: np.ndarray, weights: np.ndarray, target: int) -> list[int]:
    chosen = sorted(set(int(h) for h in hits))
    if len(chosen) >= target:
        return chosen[:target]
    taken = set(chosen)
    # highest weight first, lower slot on ties
    order = sorted((k for k in range(len(weights)) if k not in taken),
                   key=lambda k: (-weights[k], k))
    chosen.extend(order[: target - len(chosen)])
    return sorted(chosen)


def sample_glcm(profile: EntropyProfile, config: SamplingConfig = SamplingConfig()) -> SamplingPlan:
    config.validate()
    n = len(profile)
    ids = profile.slice_indices
    if n == 1:
        return SamplingPlan(profile.volume_id, "glcm", [int(ids[0])],
                            np.array([1.0]), np.array([1.0]), True, config,
                            [int(ids[0])] * config.n_samples)

    smoothed = sg_smooth(profile.values, config.sg)
    weights, degenerate = diff_abs_normalize(smoothed)
    cdf = build_cdf(weights)
    if config.quantile_mode == "midpoint":
        u = midpoint_quantiles(config.n_samples)
    else:
        u = seeded_quantiles(config.n_samples, config.seed)
    hits = inverse_cdf_sample(cdf, u)

    if config.allow_duplicates:
        slots = sorted(int(h) for h in hits)
    else:
        # the last curated slot carries no weight but may be backfilled
        slot_weights = np.append(weights, 0.0)
        slots = _dedupe_backfill(hits, slot_weights, min(config.n_samples, n))
    selected = [int(ids[k]) for k in slots]
    draws = [int(ids[k]) for k in hits]
    return SamplingPlan(profile.volume_id, "glcm", selected, weights, cdf, degenerate,
                        config, draws)


def sample_center(n_curated: int, n_samples: int) -> list[int]:
    """Contiguous block of ``min(N, n)`` positions around ``n // 2``."""
    if n_curated < 1:
        raise ValueError("n_curated must be >= 1")
    if n_samples < 1:
        raise ValueError("n must be ≥ 1")
    k = min(n_samples, n_curated)
    start = min(max(n_curated // 2 - n_samples // 2, 0), n_curated - k)
    return list(range(start, start + k))


def sample_uniform(n_curated: int, n_samples: int) -> list[int]:
    """Positions ``floor((m + 0.5) * n / N)``, deduplicated ascending."""
    if n_curated < 1:
        raise ValueError("n_curated must be >= 1")
    if n_samples < 1:
        raise ValueError("n must be ≥ 1")
    return sorted({((2 * m + 1) * n_curated) // (2 * n_samples) for m in range(n_samples)})


def sample_profile(profile: EntropyProfile, config: SamplingConfig = SamplingConfig()) -> SamplingPlan:
    """Dispatch on ``config.strategy``; baselines ignore the smoothing settings."""
    config.validate()
    if config.strategy == "glcm":
        return sample_glcm(profile, config)
    n = len(profile)
    if config.strategy == "center":
        slots = sample_center(n, config.n_samples)
    else:
        slots = sample_uniform(n, config.n_samples)
    weights = np.full(n, 1.0 / n)
    cdf = build_cdf(weights)
    selected = [int(profile.slice_indices[k]) for k in slots]
    return SamplingPlan(profile.volume_id, config.strategy, selected, weights, cdf, False, config)
