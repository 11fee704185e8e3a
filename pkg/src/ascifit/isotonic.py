"""Least-squares isotonic regression (pool adjacent violators)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput, NonFinite


@dataclass(frozen=True)
class IsotonicFit:
    """Projection of a sequence onto the non-decreasing cone.

    ``blocks`` holds ``(start, end, level)`` runs with ``end`` exclusive.
    """

    values: np.ndarray
    blocks: list[tuple[int, int, float]]

    @property
    def levels(self) -> np.ndarray:
        return np.array([b[2] for b in self.blocks])

    @property
    def counts(self) -> np.ndarray:
        return np.array([b[1] - b[0] for b in self.blocks])


def _as_vector(y) -> np.ndarray:
    y = np.asarray(y, dtype=float).ravel()
    if y.size == 0:
        raise EmptyInput("input vector is empty")
    if not np.all(np.isfinite(y)):
        raise NonFinite("input vector contains NaN or inf")
    return y


def pava(y) -> IsotonicFit:
    """Pool adjacent violators, unit weights, O(n).

    Blocks are kept on a stack as ``(sum, count)``; a new point is merged
    backwards while the previous block's mean strictly exceeds it.
    """
    y = _as_vector(y)
    sums: list[float] = []
    counts: list[int] = []
    for v in y.tolist():
        s, c = v, 1
        # compare means without dividing: s_prev / c_prev > s / c
        while sums and sums[-1] * c > s * counts[-1]:
            s += sums.pop()
            c += counts.pop()
        sums.append(s)
        counts.append(c)

    blocks = []
    values = np.empty_like(y)
    start = 0
    for s, c in zip(sums, counts):
        level = s / c
        values[start:start + c] = level
        blocks.append((start, start + c, level))
        start += c
    return IsotonicFit(values=values, blocks=blocks)


def pava_lower_bounded(y, floor: float) -> IsotonicFit:
    """Projection onto ``{floor <= x_1 <= ... <= x_n}``.

    Equals the unconstrained fit clamped from below at ``floor``.
    """
    if not np.isfinite(floor):
        raise NonFinite("floor must be finite")
    fit = pava(y)
    values = np.maximum(fit.values, floor)
    blocks = []
    for start, end, level in fit.blocks:
        level = max(level, floor)
        if blocks and blocks[-1][2] == level:
            blocks[-1] = (blocks[-1][0], end, level)
        else:
            blocks.append((start, end, level))
    return IsotonicFit(values=values, blocks=blocks)


def maxmin_oracle(y) -> np.ndarray:
    """Isotonic fit via ``max_{j<=i} min_{k>=i} mean(y[j..k])``.

    O(n^3) with prefix sums; a test reference only.
    """
    y = _as_vector(y)
    n = y.size
    csum = np.concatenate(([0.0], np.cumsum(y)))
    # means[j, k] = mean(y[j..k]) for j <= k
    j = np.arange(n)[:, None]
    k = np.arange(n)[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        means = (csum[k + 1] - csum[j]) / (k - j + 1)
    out = np.empty(n)
    for i in range(n):
        out[i] = max(means[jj, i:].min() for jj in range(i + 1))
    return out
