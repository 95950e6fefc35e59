"""Binary classification metrics (positive class = COVID)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence


class UndefinedMetricError(ZeroDivisionError):
    def __init__(self, metric: str, reason: str) -> None:
        super().__init__(f"{metric} is undefined: {reason}")
        self.metric = metric


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def swapped(self) -> "ConfusionCounts":
        """Counts under the opposite positive-class convention."""
        return ConfusionCounts(tp=self.tn, fp=self.fn, tn=self.tp, fn=self.fp)


def confusion(predictions: Sequence[int], labels: Sequence[int]) -> ConfusionCounts:
    if len(predictions) != len(labels):
        raise ValueError(f"length mismatch: {len(predictions)} predictions, {len(labels)} labels")
    if len(labels) == 0:
        raise ValueError("need at least one prediction")
    tp = fp = tn = fn = 0
    for p, y in zip(predictions, labels):
        if p not in (0, 1) or y not in (0, 1):
            raise ValueError(f"predictions and labels must be 0/1, got {p!r}, {y!r}")
        if p and y:
            tp += 1
        elif p:
            fp += 1
        elif y:
            fn += 1
        else:
            tn += 1
    return ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn)


def sensitivity(c: ConfusionCounts) -> float:
    if c.tp + c.fn == 0:
        raise UndefinedMetricError("sensitivity", "no positive labels")
    return c.tp / (c.tp + c.fn)


def specificity(c: ConfusionCounts) -> float:
    if c.tn + c.fp == 0:
        raise UndefinedMetricError("specificity", "no negative labels")
    return c.tn / (c.tn + c.fp)


def _f1(tp: int, fp: int, fn: int) -> float:
    return 2 * tp / (2 * tp + fp + fn)


def macro_f1(c: ConfusionCounts) -> float:
    """Mean of the positive-class and negative-class F1."""
    if c.tp + c.fn == 0 or c.tn + c.fp == 0:
        raise UndefinedMetricError("macro F1", "both classes must be present")
    return (_f1(c.tp, c.fp, c.fn) + _f1(c.tn, c.fn, c.fp)) / 2


def as_percent(x: float) -> str:
    return f"{100 * x:.2f}"
