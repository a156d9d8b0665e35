"""Gap sequences omega = (q_n) that parametrize random Cantor sets.

A sequence is an immutable generator description.  Terms are indexed from
n = 1.  Besides the float value ``q(n)`` every generator provides the
complement ``1 - q_n`` and its logarithm computed without cancellation,
which matters for sequences that approach one (``1 - 2**-(2**n)`` is 1.0 in
double precision from n = 6 on).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InvalidSequenceError, NoLowerBoundError

KINDS = (
    "constant",
    "geometric",
    "shifted_geometric",
    "approach_one",
    "double_exponential",
    "explicit",
    "seeded_uniform",
    "decay",
)

_MASK64 = (1 << 64) - 1
_GOLDEN64 = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """SplitMix64 finalizer applied to ``x + golden`` (all mod 2**64)."""
    z = (x + _GOLDEN64) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def counter_uniform(seed: int, n: int) -> float:
    """Uniform variate in [0, 1) for draw ``n`` of stream ``seed``.

    Counter based: ``u_n = (splitmix64(seed + n * golden) >> 11) * 2**-53``,
    so any term can be regenerated without replaying the stream.
    """
    return (splitmix64((seed + n * _GOLDEN64) & _MASK64) >> 11) * 2.0**-53


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


@dataclass(frozen=True)
class GapSequence:
    """A generator for q_1, q_2, ... with optional declared bounds.

    ``declared_delta`` claims q_n >= delta for every n; ``declared_upper``
    claims q_n <= 1 - delta.  Both are checked lazily whenever a term is
    emitted.  Use the classmethod constructors rather than building the
    ``params`` tuple by hand.
    """

    kind: str
    params: tuple
    declared_delta: float | None = None
    declared_upper: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        for name in ("declared_delta", "declared_upper"):
            v = getattr(self, name)
            if v is not None and not 0 < v < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")

    # -- constructors -----------------------------------------------------

    @classmethod
    def constant(cls, q, **bounds) -> "GapSequence":
        q = _frac(q)
        if not 0 < q < 1:
            raise InvalidSequenceError(f"constant q={q} outside (0, 1)")
        return cls("constant", (q,), **bounds)

    @classmethod
    def geometric(cls, a, **bounds) -> "GapSequence":
        a = _frac(a)
        if not 0 < a < 1:
            raise InvalidSequenceError(f"ratio a={a} outside (0, 1)")
        return cls("geometric", (a,), **bounds)

    @classmethod
    def shifted_geometric(cls, a, shift: int, **bounds) -> "GapSequence":
        a = _frac(a)
        if not 0 < a < 1:
            raise InvalidSequenceError(f"ratio a={a} outside (0, 1)")
        if int(shift) != shift or shift < 0:
            raise ValueError("shift must be a non-negative integer")
        return cls("shifted_geometric", (a, int(shift)), **bounds)

    @classmethod
    def approach_one(cls, base, **bounds) -> "GapSequence":
        b = _frac(base)
        if b <= 1:
            raise InvalidSequenceError(f"base {b} must exceed 1")
        return cls("approach_one", (b,), **bounds)

    @classmethod
    def double_exponential(cls, **bounds) -> "GapSequence":
        return cls("double_exponential", (), **bounds)

    @classmethod
    def explicit(cls, values: Sequence, **bounds) -> "GapSequence":
        vals = tuple(_frac(v) for v in values)
        if not vals:
            raise InvalidSequenceError("explicit sequence needs at least one term")
        return cls("explicit", vals, **bounds)

    @classmethod
    def seeded_uniform(cls, lo, hi, seed: int, **bounds) -> "GapSequence":
        lo, hi = float(lo), float(hi)
        if not 0 < lo < hi < 1:
            raise InvalidSequenceError(f"need 0 < lo < hi < 1, got ({lo}, {hi})")
        return cls("seeded_uniform", (lo, hi, int(seed) & _MASK64), **bounds)

    @classmethod
    def decay(cls, base, amp, power: int = 2, offset: int = 0, **bounds) -> "GapSequence":
        """q_n = base + amp / (n + offset)**power."""
        base, amp = _frac(base), _frac(amp)
        if int(power) != power or power < 1 or int(offset) != offset or offset < 0:
            raise ValueError("power must be a positive integer, offset non-negative")
        seq = cls("decay", (base, amp, int(power), int(offset)), **bounds)
        first = seq._exact_value(1)
        if amp >= 0:
            ok = base >= 0 and first < 1 and (base > 0 or amp > 0)
        else:
            ok = first > 0 and base <= 1
        if not ok:
            raise InvalidSequenceError(
                f"decay sequence leaves (0, 1): q_1={first}, limit={base}")
        return seq

    # -- term access ------------------------------------------------------

    def _exact_value(self, n: int) -> Fraction | None:
        p = self.params
        if self.kind == "constant":
            return p[0]
        if self.kind == "geometric":
            return p[0] ** n
        if self.kind == "shifted_geometric":
            return p[0] ** (n + p[1])
        if self.kind == "approach_one":
            return 1 - p[0] ** (-n)
        if self.kind == "double_exponential":
            return 1 - Fraction(1, 1 << (1 << n)) if n <= 16 else None
        if self.kind == "explicit":
            if n > len(p):
                raise InvalidSequenceError(
                    f"explicit sequence has {len(p)} terms, q_{n} requested")
            return p[n - 1]
        if self.kind == "decay":
            base, amp, power, offset = p
            return base + amp / Fraction(n + offset) ** power
        return None

    def _check_index(self, n: int) -> None:
        if int(n) != n or n < 1:
            raise ValueError(f"term index must be a positive integer, got {n}")

    def exact(self, n: int) -> Fraction | None:
        """Exact rational value of q_n, or None if the generator is not rational."""
        self._check_index(n)
        return self._exact_value(n)

    def q(self, n: int) -> float:
        self._check_index(n)
        k, p = self.kind, self.params
        if k == "constant":
            val = float(p[0])
        elif k == "geometric":
            val = float(p[0]) ** n
        elif k == "shifted_geometric":
            val = float(p[0]) ** (n + p[1])
        elif k in ("approach_one", "double_exponential"):
            val = -math.expm1(self.log_one_minus_q(n))
        elif k == "seeded_uniform":
            lo, hi, seed = p
            val = lo + (hi - lo) * counter_uniform(seed, n)
        else:
            ex = self._exact_value(n)
            if not 0 < ex < 1:
                raise InvalidSequenceError(f"q_{n} = {ex} outside (0, 1)")
            val = float(ex)
        self._check_declared(n, val)
        return val

    def _check_declared(self, n: int, val: float) -> None:
        if self.declared_delta is not None and val < self.declared_delta:
            raise InvalidSequenceError(
                f"q_{n} = {val} violates declared lower bound {self.declared_delta}")
        if self.declared_upper is not None and val > 1 - self.declared_upper:
            raise InvalidSequenceError(
                f"q_{n} = {val} violates declared upper bound 1 - {self.declared_upper}")

    def log_one_minus_q(self, n: int) -> float:
        """log(1 - q_n), finite even when 1 - q_n underflows."""
        self._check_index(n)
        k, p = self.kind, self.params
        if k == "approach_one":
            return -n * math.log(p[0])
        if k == "double_exponential":
            return -(2.0 ** n) * math.log(2.0)
        return math.log1p(-self.q(n))

    def one_minus_q(self, n: int) -> float:
        self._check_index(n)
        k, p = self.kind, self.params
        if k == "approach_one":
            return float(p[0] ** (-n)) if n < 64 else math.exp(self.log_one_minus_q(n))
        if k == "double_exponential":
            return 2.0 ** -(2 ** n) if n < 11 else 0.0
        ex = self._exact_value(n)
        if ex is not None and k != "geometric" and k != "shifted_geometric":
            return float(1 - ex)
        return 1.0 - self.q(n)

    def values(self, count: int) -> np.ndarray:
        return np.array([self.q(n) for n in range(1, count + 1)])

    def log_one_minus_values(self, count: int) -> np.ndarray:
        return np.array([self.log_one_minus_q(n) for n in range(1, count + 1)])

    # -- metadata ---------------------------------------------------------

    def lower_bound(self) -> float | None:
        """Infimum of the terms (declared bound wins); None when it is 0."""
        if self.declared_delta is not None:
            return self.declared_delta
        k, p = self.kind, self.params
        if k == "constant":
            return float(p[0])
        if k == "approach_one":
            return float(1 - 1 / p[0])
        if k == "double_exponential":
            return 0.75
        if k == "explicit":
            return float(min(p))
        if k == "seeded_uniform":
            return p[0]
        if k == "decay":
            base, amp = p[0], p[1]
            if amp < 0:
                return float(self._exact_value(1))
            return float(base) if base > 0 else None
        return None

    def upper_margin(self) -> float | None:
        """Largest delta with q_n <= 1 - delta for all n, or None if sup q_n = 1."""
        if self.declared_upper is not None:
            return self.declared_upper
        k, p = self.kind, self.params
        if k == "constant":
            return float(1 - p[0])
        if k == "geometric":
            return float(1 - p[0])
        if k == "shifted_geometric":
            return float(1 - p[0] ** (1 + p[1]))
        if k == "explicit":
            return float(1 - max(p))
        if k == "seeded_uniform":
            return 1 - p[1]
        if k == "decay":
            base, amp = p[0], p[1]
            sup = self._exact_value(1) if amp >= 0 else base
            return float(1 - sup) if sup < 1 else None
        return None

    @property
    def finite_length(self) -> int | None:
        return len(self.params) if self.kind == "explicit" else None

    def same_generator(self, other: "GapSequence") -> bool:
        return self.kind == other.kind and self.params == other.params

    def to_spec(self) -> str:
        k, p = self.kind, self.params
        if k == "constant":
            return f"const:{p[0]}"
        if k == "geometric":
            return f"geom:{p[0]}"
        if k == "shifted_geometric":
            return f"geomL:{p[0]}:{p[1]}"
        if k == "approach_one":
            return f"one-minus:{p[0]}"
        if k == "double_exponential":
            return "dexp"
        if k == "explicit":
            return "list:" + ",".join(str(v) for v in p)
        if k == "seeded_uniform":
            return f"rand:{p[0]!r}:{p[1]!r}:{p[2]}"
        return f"decay:{p[0]}:{p[1]}:{p[2]}:{p[3]}"

    def __str__(self) -> str:
        return self.to_spec()


def parse_sequence(text: str) -> GapSequence:
    """Parse the CLI grammar, e.g. ``const:1/3``, ``geomL:0.5:3``, ``rand:0.2:0.8:7``.

    Also accepted: ``dexp`` (q_n = 1 - 2^(-2^n)) and
    ``decay:base:amp[:power[:offset]]`` (q_n = base + amp/(n+offset)^power).
    """
    text = text.strip()
    head, _, rest = text.partition(":")
    args = rest.split(":") if rest else []
    try:
        if head == "const" and len(args) == 1:
            return GapSequence.constant(args[0])
        if head == "geom" and len(args) == 1:
            return GapSequence.geometric(args[0])
        if head == "geomL" and len(args) == 2:
            return GapSequence.shifted_geometric(args[0], int(args[1]))
        if head == "one-minus" and len(args) == 1:
            return GapSequence.approach_one(args[0])
        if head == "dexp" and not args:
            return GapSequence.double_exponential()
        if head == "list" and len(args) == 1:
            return GapSequence.explicit(args[0].split(","))
        if head == "rand" and len(args) == 3:
            lo, hi = float(_frac(args[0])), float(_frac(args[1]))
            return GapSequence.seeded_uniform(lo, hi, int(args[2]), declared_delta=lo)
        if head == "decay" and 2 <= len(args) <= 4:
            extra = [int(a) for a in args[2:]]
            return GapSequence.decay(args[0], args[1], *extra)
    except (ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, InvalidSequenceError):
            raise
        raise ValueError(f"bad sequence spec {text!r}: {exc}") from exc
    raise ValueError(f"unknown sequence spec {text!r}")


def q_at(seq: GapSequence, n: int) -> float:
    return seq.q(n)


class Distance(NamedTuple):
    value: float
    flag: str  # "exact" or "truncated"
    argmax: int


def _distance_terms(w: GapSequence, wt: GapSequence, horizon: int) -> np.ndarray:
    lw = w.log_one_minus_values(horizon)
    lwt = wt.log_one_minus_values(horizon)
    qw = w.values(horizon)
    qwt = wt.values(horizon)
    return np.maximum(np.abs(lwt - lw), np.abs(qwt - qw))


def sequence_distance(w: GapSequence, wt: GapSequence, horizon: int) -> Distance:
    """sup_{n <= horizon} max(|log((1-q~_n)/(1-q_n))|, |q~_n - q_n|).

    The flag is ``exact`` only when the finite sup provably equals the full
    sup: identical generators or two constants.
    """
    if int(horizon) != horizon or horizon < 1:
        raise ValueError("horizon must be a positive integer")
    if w.same_generator(wt):
        return Distance(0.0, "exact", 1)
    terms = _distance_terms(w, wt, horizon)
    idx = int(np.argmax(terms))
    exact = w.kind == "constant" and wt.kind == "constant"
    return Distance(float(terms[idx]), "exact" if exact else "truncated", idx + 1)


def effective_delta(w: GapSequence, wt: GapSequence) -> float:
    """Shared lower bound min(delta(w), delta(wt)) used for both decompositions."""
    lows = []
    for s in (w, wt):
        lb = s.lower_bound()
        if lb is None or lb <= 0:
            raise NoLowerBoundError(f"{s} has no positive lower bound")
        lows.append(lb)
    return min(lows)
