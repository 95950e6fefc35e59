"""Savitzky-Golay smoothing of entropy profiles."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class SgConfig:
    window: int = 3
    order: int = 2

    def validate(self) -> None:
        if self.window < 3 or self.window % 2 == 0:
            raise ValueError(f"window must be odd and >= 3, got {self.window}")
        if not 0 <= self.order < self.window:
            raise ValueError(f"order must satisfy 0 <= order < window, got {self.order}")


def _solve_exact(a: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    n = len(b)
    m = [row[:] + [rhs] for row, rhs in zip(a, b)]
    for col in range(n):
        pivot = next(r for r in range(col, n) if m[r][col] != 0)
        m[col], m[pivot] = m[pivot], m[col]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col] / m[col][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [m[i][n] / m[i][i] for i in range(n)]


@lru_cache(maxsize=None)
def _exact_coefficients(window: int, order: int) -> tuple[Fraction, ...]:
    h = (window - 1) // 2
    xs = range(-h, h + 1)
    # normal equations (A^T A) beta = e_0 with A the Vandermonde matrix on -h..h;
    # the smoothing weights are then c_j = sum_k beta_k x_j^k.
    moments = [sum(Fraction(x) ** k for x in xs) for k in range(2 * order + 1)]
    ata = [[moments[i + j] for j in range(order + 1)] for i in range(order + 1)]
    e0 = [Fraction(1)] + [Fraction(0)] * order
    beta = _solve_exact(ata, e0)
    return tuple(sum(beta[k] * Fraction(x) ** k for k in range(order + 1)) for x in xs)


def sg_coefficients(window: int, order: int) -> np.ndarray:
    """Least-squares smoothing weights evaluated at the window centre.

    Solved exactly over the rationals, so the weights are symmetric and
    e.g. ``sg_coefficients(5, 2) == [-3, 12, 17, 12, -3] / 35`` to the last bit.
    """
    SgConfig(window, order).validate()
    return np.array([float(c) for c in _exact_coefficients(window, order)])


def _mirror_index(i: np.ndarray, n: int) -> np.ndarray:
    if n == 1:
        return np.zeros_like(i)
    period = 2 * (n - 1)
    i = np.mod(i, period)
    return np.where(i > n - 1, period - i, i)


def sg_smooth(values: Sequence[float], config: SgConfig = SgConfig()) -> np.ndarray:
    """Convolve with SG weights after mirror padding (edge sample not repeated).

    Short sequences keep reflecting back and forth as far as the window needs.
    """
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1 or len(x) < 1:
        raise ValueError("values must be a non-empty 1-D sequence")
    coeffs = sg_coefficients(config.window, config.order)
    h = (config.window - 1) // 2
    n = len(x)
    padded = x[_mirror_index(np.arange(-h, n + h), n)]
    windows = np.lib.stride_tricks.sliding_window_view(padded, config.window)
    return windows @ coeffs
