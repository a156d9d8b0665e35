"""Nested interval levels E_k of a random Cantor set.

Level k consists of 2**k closed intervals of a common length
``|I_k| = 2**-k * prod_{j<=k} (1 - q_j)`` and 2**k - 1 open gaps.  A gap
present at level k was created at some level m <= k (when I_{m-1} was
split), and all gaps created at level m share the length
``q_m * |I_{m-1}|``.  Gap lengths are therefore stored once per creation
level and never recovered by subtracting nearby endpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .sequences import GapSequence

MAX_DEPTH = 24
_TINY = 2.2250738585072014e-308  # smallest normal double


def _trailing_zeros(i: np.ndarray) -> np.ndarray:
    i = np.asarray(i, dtype=np.int64)
    low = i & -i
    return np.log2(low).astype(np.int64)


def gap_creation_levels(k: int) -> np.ndarray:
    """Creation level of each gap J_k^1 .. J_k^{2^k - 1}.

    Index i = 2**l * m with m odd was created at level k - l.
    """
    i = np.arange(1, 2**k, dtype=np.int64)
    return k - _trailing_zeros(i)


def _level_lengths(seq: GapSequence, depth: int) -> tuple[np.ndarray, np.ndarray]:
    logs = [0.0]
    lengths = [1.0]
    terms = [0.0]
    prod = 1.0
    for j in range(1, depth + 1):
        terms.append(seq.log_one_minus_q(j) - math.log(2.0))
        logs.append(math.fsum(terms))
        prod *= 0.5 * seq.one_minus_q(j)
        lengths.append(prod if prod >= _TINY else math.exp(logs[-1]))
    return np.array(lengths), np.array(logs)


def interval_length(seq: GapSequence, k: int) -> float:
    """|I_k^1| = 2^-k prod_{j<=k} (1 - q_j); 0.0 only if even log space underflows."""
    if k < 0:
        raise ValueError("level must be non-negative")
    lengths, _ = _level_lengths(seq, k)
    return float(lengths[k])


def log_interval_length(seq: GapSequence, k: int) -> float:
    if k < 0:
        raise ValueError("level must be non-negative")
    _, logs = _level_lengths(seq, k)
    return float(logs[k])


def gap_length(seq: GapSequence, k: int, i: int) -> float:
    """Length of gap J_k^i (1-based), resolving even indices to their ancestor."""
    if k < 1 or not 1 <= i <= 2**k - 1:
        raise IndexError(f"gap index {i} out of range for level {k}")
    while i % 2 == 0:
        i //= 2
        k -= 1
    return seq.q(k) * interval_length(seq, k - 1)


@dataclass(frozen=True)
class GapBoundReport:
    min_ratio: float
    worst_level: int
    worst_index: int
    bound: float
    passed: bool


@dataclass
class CantorLevels:
    """Levels 0..depth of the construction, in unit-interval coordinates."""

    seq: GapSequence
    depth: int
    lengths: np.ndarray
    log_lengths: np.ndarray
    q: np.ndarray  # q[j] for j = 1..depth, q[0] unused
    gap_lengths: np.ndarray  # by creation level m = 1..depth
    gap_log_lengths: np.ndarray
    lefts: list[np.ndarray] = field(repr=False)

    def intervals(self, k: int) -> tuple[np.ndarray, float]:
        return self.lefts[k], float(self.lengths[k])

    def midpoints(self, k: int) -> np.ndarray:
        return self.lefts[k] + 0.5 * self.lengths[k]

    def gaps(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """Left endpoints and lengths of J_k^1 .. J_k^{2^k-1}."""
        if k < 1:
            return np.empty(0), np.empty(0)
        lefts = self.lefts[k][:-1] + self.lengths[k]
        return lefts, self.gap_lengths[gap_creation_levels(k)]

    def gap_log_ratios(self, k: int) -> np.ndarray:
        """log(|J_k^i| / |I_k^1|) for every gap at level k."""
        return self.gap_log_lengths[gap_creation_levels(k)] - self.log_lengths[k]

    def closure_error(self) -> float:
        """Max |right end of I_k^i - right end of I_{k+1}^{2i}| over all levels."""
        worst = 0.0
        for k in range(self.depth):
            parent_right = self.lefts[k] + self.lengths[k]
            child_right = self.lefts[k + 1][1::2] + self.lengths[k + 1]
            mid = self.lefts[k + 1][0::2] + self.lengths[k + 1] + self.gap_lengths[k + 1]
            worst = max(worst,
                        float(np.max(np.abs(parent_right - child_right))),
                        float(np.max(np.abs(mid - self.lefts[k + 1][1::2]))))
        return worst

    def rows(self) -> Iterator[tuple]:
        """CSV rows ``level, kind, index, left, length``."""
        for k in range(self.depth + 1):
            lefts, length = self.intervals(k)
            for i, left in enumerate(lefts, start=1):
                yield k, "I", i, float(left), length
            glefts, glens = self.gaps(k)
            for i, (left, length_j) in enumerate(zip(glefts, glens), start=1):
                yield k, "J", i, float(left), float(length_j)


def build_levels(seq: GapSequence, k_max: int) -> CantorLevels:
    if int(k_max) != k_max or k_max < 0:
        raise ValueError("k_max must be a non-negative integer")
    if k_max > MAX_DEPTH:
        raise ValueError(f"depth {k_max} exceeds the supported maximum {MAX_DEPTH}")
    lengths, logs = _level_lengths(seq, k_max)
    q = np.zeros(k_max + 1)
    gap_len = np.zeros(k_max + 1)
    gap_log = np.full(k_max + 1, -np.inf)
    for m in range(1, k_max + 1):
        q[m] = seq.q(m)
        gap_log[m] = math.log(q[m]) + logs[m - 1]
        gap_len[m] = q[m] * lengths[m - 1]
    lefts = [np.zeros(1)]
    for k in range(1, k_max + 1):
        parent = lefts[-1]
        child = np.empty(2 * parent.size)
        child[0::2] = parent
        child[1::2] = parent + (lengths[k - 1] - lengths[k])
        lefts.append(child)
    return CantorLevels(seq, k_max, lengths, logs, q, gap_len, gap_log, lefts)


def check_gap_bound(levels: CantorLevels, delta: float) -> GapBoundReport:
    """Check |J_{k}^i| >= 2 delta |I_{k}^1| for every gap of every built level."""
    bound = 2.0 * delta
    best = (math.inf, 0, 0)
    for k in range(1, levels.depth + 1):
        ratios = np.exp(levels.gap_log_ratios(k))
        i = int(np.argmin(ratios))
        if ratios[i] < best[0]:
            best = (float(ratios[i]), k, i + 1)
    ratio, lvl, idx = best
    return GapBoundReport(ratio, lvl, idx, bound, bool(ratio >= bound))
