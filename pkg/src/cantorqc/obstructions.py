"""Theorem III: short curves in X_E(omega) when sup q_n = 1.

Around I^1_{n} (inside I^1_{n-1}) the round annulus with radii
r = eps|I_{n-1}|/4 and R = (1/2 - eps/4)|I_{n-1}|, eps = 1 - q_n, misses
E(omega); its core curve has hyperbolic length 2 pi^2 / log(R/r), and R/r =
(2 - eps)/eps does not depend on the interval length.  By monotonicity of
the hyperbolic metric the corresponding curve of X_E(omega) is at least as
short.  If that length drops below d/K (Wolpert) no K-quasiconformal map to
X_C can exist, where d is the systole of X_C.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .construction import log_interval_length
from .sequences import GapSequence

# Length of the core curve of the largest round annulus around I_1^1 of the
# middle-thirds set (centre 1/6, radii 1/6 and 1/2).  This bounds the systole
# of X_C from *above*, so it must not be used as d: with d this large every
# sequence with some q_n > 1/2 yields a spurious witness at K = 1.
MIDDLE_THIRD_CURVE_LENGTH = 2 * math.pi**2 / math.log(3.0)

# Default systole lower bound d (the value used in the acceptance criteria).
# Not certified; pass a proven bound when one is available.
DEFAULT_D = 1.0


def annulus_core_length(r: float, R: float) -> float:
    """Hyperbolic length 2 pi^2 / log(R/r) of the core curve of {r < |z| < R}."""
    if not 0 < r < R:
        raise ValueError("need 0 < r < R")
    return core_length_from_log_ratio(math.log(R) - math.log(r))


def core_length_from_log_ratio(log_ratio: float) -> float:
    if log_ratio <= 0:
        raise ValueError("annulus ratio must exceed 1")
    return 2 * math.pi**2 / log_ratio


def wolpert_threshold(K: float, d: float) -> float:
    """Shortest possible image length d/K of a curve of length >= d under K-qc maps."""
    if K < 1:
        raise ValueError("K must be >= 1")
    if d <= 0:
        raise ValueError("d must be positive")
    return d / K


@dataclass(frozen=True)
class ObstructionWitness:
    n: int
    eps: float
    log_r: float
    log_R: float
    length: float
    threshold: float
    K: float
    d: float

    @property
    def r(self) -> float:
        return math.exp(self.log_r)

    @property
    def R(self) -> float:
        return math.exp(self.log_R)

    @property
    def valid(self) -> bool:
        return self.log_r < self.log_R and self.length > 0 and self.length < self.threshold

    def chain(self) -> str:
        return (f"n={self.n}: eps=1-q_n={self.eps:.6g}, R/r=(2-eps)/eps, "
                f"l = 2pi^2/log(R/r) = {self.length:.6g} < d/K = {self.d:.6g}/{self.K:.6g} "
                f"= {self.threshold:.6g}")


def annulus_at(seq: GapSequence, n: int) -> tuple[float, float, float]:
    """(eps, log r, log R) of the §5 annulus at level n (I^1_{n-1} read for I^1_{q_k - 1})."""
    eps = seq.one_minus_q(n)
    log_len = log_interval_length(seq, n - 1)
    log_r = math.log(0.25) + seq.log_one_minus_q(n) + log_len
    log_R = math.log(0.5 - 0.25 * eps) + log_len
    return eps, log_r, log_R


def find_obstruction(seq: GapSequence, K: float, d: float = DEFAULT_D,
                     horizon: int = 1000) -> ObstructionWitness | None:
    """First n <= horizon whose §5 annulus has core length < d/K, else None."""
    thr = wolpert_threshold(K, d)
    log_len = 0.0  # log |I_{n-1}|, accumulated as we scan
    for n in range(1, horizon + 1):
        eps = seq.one_minus_q(n)
        log_eps = seq.log_one_minus_q(n)  # exact even when eps underflows
        length = core_length_from_log_ratio(math.log(2.0 - eps) - log_eps)
        if length < thr:
            return ObstructionWitness(n, eps, math.log(0.25) + log_eps + log_len,
                                      math.log(0.5 - 0.25 * eps) + log_len, length, thr, K, d)
        log_len += log_eps - math.log(2.0)
    return None
