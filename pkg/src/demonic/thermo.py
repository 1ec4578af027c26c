"""State space, exact distributions and the entropy bookkeeping.

Units: k = T = 1, work in units of kT ln2 and entropy in units of k ln2, so
the work counter ``w`` is the extracted work and the positional entropy is
the binary entropy ``h(X)``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

ZERO = Fraction(0)
HALF = Fraction(1, 2)
ONE = Fraction(1)

#: The only admissible values of X (probability of left-hand occupancy).
PARTICLE_PROBS = (ZERO, HALF, ONE)

#: Tolerance for comparisons on the (float) entropy side.
EPS = 1e-9


class DistError(ValueError):
    """Raised for probability tables that are not distributions."""


def particle_prob(value) -> Fraction:
    """Coerce ``value`` to one of 0, 1/2, 1 or raise ``ValueError``."""
    if isinstance(value, str):
        value = Fraction(value.strip())
    elif isinstance(value, float):
        value = Fraction(value).limit_denominator(2)
    else:
        value = Fraction(value)
    if value not in PARTICLE_PROBS:
        raise ValueError(f"X must be one of 0, 1/2, 1 (got {value})")
    return value


def fmt_frac(q: Fraction) -> str:
    return str(Fraction(q))


@dataclass(frozen=True, order=True)
class BoxState:
    """The record ``(X, A, I, w)``: particle probability, partition, piston, work."""

    X: Fraction
    A: bool
    I: bool  # noqa: E741
    w: int

    def __post_init__(self):
        object.__setattr__(self, "X", particle_prob(self.X))
        if not isinstance(self.A, bool) or not isinstance(self.I, bool):
            raise TypeError("A and I must be booleans")
        if isinstance(self.w, bool) or int(self.w) != self.w:
            raise TypeError("w must be an integer")
        object.__setattr__(self, "w", int(self.w))

    def replace(self, **changes) -> "BoxState":
        fields = {"X": self.X, "A": self.A, "I": self.I, "w": self.w}
        fields.update(changes)
        return BoxState(**fields)

    @property
    def base(self) -> tuple[Fraction, bool, bool]:
        return (self.X, self.A, self.I)

    def __str__(self) -> str:
        return f"({self.X}, {_flag(self.A)}, {_flag(self.I)}, {self.w})"

    @classmethod
    def parse(cls, text: str) -> "BoxState":
        """Parse the textual rendering, e.g. ``"(1/2, F, F, 0)"``."""
        m = _STATE_RE.fullmatch(text.strip())
        if not m:
            raise ValueError(f"invalid state literal: {text!r}")
        x, a, i, w = m.groups()
        return cls(particle_prob(x), _parse_flag(a), _parse_flag(i), int(w))


_STATE_RE = re.compile(
    r"\(\s*(0|1/2|1)\s*,\s*(\w+)\s*,\s*(\w+)\s*,\s*([+-]?\d+)\s*\)"
)


def _flag(b: bool) -> str:
    return "T" if b else "F"


def _parse_flag(tok: str) -> bool:
    t = tok.strip().lower()
    if t in ("t", "true"):
        return True
    if t in ("f", "false"):
        return False
    raise ValueError(f"invalid boolean flag: {tok!r}")


class Dist(Mapping):
    """Finite-support distribution over :class:`BoxState`, exact weights.

    Entries are kept canonical: no duplicates, no zero weights, sorted by
    state.  Construct through :func:`merge` or :func:`point`.
    """

    __slots__ = ("_entries", "_hash")

    def __init__(self, entries: Iterable[tuple[BoxState, Fraction]]):
        entries = tuple(entries)
        total = ZERO
        prev = None
        for s, p in entries:
            if not isinstance(s, BoxState):
                raise TypeError(f"not a BoxState: {s!r}")
            if p <= 0 or p > 1:
                raise DistError(f"probability {p} out of (0, 1]")
            if prev is not None and not prev < s:
                raise DistError("entries must be strictly sorted; use merge()")
            prev = s
            total += p
        if total != 1:
            raise DistError(f"probabilities sum to {total}, not 1")
        self._entries = tuple((s, Fraction(p)) for s, p in entries)
        self._hash = None

    def __getitem__(self, s):
        for t, p in self._entries:
            if t == s:
                return p
        raise KeyError(s)

    def __iter__(self) -> Iterator[BoxState]:
        return (s for s, _ in self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def items(self):
        return self._entries

    def __eq__(self, other):
        if isinstance(other, Dist):
            return self._entries == other._entries
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._entries)
        return self._hash

    def __repr__(self):
        return "Dist({" + ", ".join(f"{p}: {s}" for s, p in self._entries) + "})"

    def __str__(self):
        return "{" + ", ".join(f"{p}: {s}" for s, p in self._entries) + "}"

    @property
    def mean_x(self) -> Fraction:
        return sum((p * s.X for s, p in self._entries), ZERO)

    @property
    def mean_w(self) -> Fraction:
        return sum((p * s.w for s, p in self._entries), ZERO)

    @classmethod
    def parse(cls, text: str) -> "Dist":
        """Parse ``"{1/2: (0, T, T, 0), 1/2: (1, T, F, -1)}"`` or a bare state."""
        text = text.strip()
        if not text.startswith("{"):
            return point(BoxState.parse(text))
        if not text.endswith("}"):
            raise ValueError(f"invalid distribution literal: {text!r}")
        body = text[1:-1]
        pairs = []
        pos = 0
        for m in _ENTRY_RE.finditer(body):
            if body[pos:m.start()].strip(" ,\n\t"):
                raise ValueError(f"invalid distribution literal: {text!r}")
            pairs.append((BoxState.parse(m.group(2)), Fraction(m.group(1))))
            pos = m.end()
        if body[pos:].strip(" ,\n\t") or not pairs:
            raise ValueError(f"invalid distribution literal: {text!r}")
        return merge(pairs)


_ENTRY_RE = re.compile(r"\s*(\d+(?:/\d+)?)\s*:\s*(\([^)]*\))")


def merge(pairs) -> Dist:
    """Canonicalise a raw list of ``(state, probability)`` pairs.

    Duplicates are summed, zeros dropped, entries sorted.  Raises
    :class:`DistError` if the weights do not sum to exactly 1.
    """
    if isinstance(pairs, Dist):
        return pairs
    acc: dict[BoxState, Fraction] = {}
    for s, p in pairs:
        p = Fraction(p)
        if p < 0:
            raise DistError(f"negative probability {p}")
        acc[s] = acc.get(s, ZERO) + p
    total = sum(acc.values(), ZERO)
    if total != 1:
        raise DistError(f"probabilities sum to {total}, not 1")
    return Dist(sorted((s, p) for s, p in acc.items() if p != 0))


def point(s: BoxState) -> Dist:
    return Dist([(s, ONE)])


def shift_w(d: Dist, c: int) -> Dist:
    """Add ``c`` to every state's work counter."""
    return Dist((s.replace(w=s.w + c), p) for s, p in d.items())


def binary_entropy(p) -> float:
    """``-p log2 p - (1-p) log2 (1-p)`` with ``0 log 0 = 0``, in units of k ln2."""
    p = Fraction(p)
    if p < 0 or p > 1:
        raise ValueError(f"binary_entropy: p={p} outside [0, 1]")
    if p == 0 or p == 1:
        return 0.0
    if p == HALF:
        return 1.0
    q = 1 - p
    return -(float(p) * math.log2(p) + float(q) * math.log2(q))


@dataclass(frozen=True)
class PhiReport:
    mean_w: Fraction
    mean_branch_entropy: float
    ensemble_entropy: float
    sigma: float
    phi: float

    @property
    def holds(self) -> bool:
        """Whether the invariant inequality ``phi <= 0`` holds (within EPS)."""
        return self.phi <= EPS

    def as_dict(self) -> dict:
        return {
            "mean_w": fmt_frac(self.mean_w),
            "mean_branch_entropy": self.mean_branch_entropy,
            "ensemble_entropy": self.ensemble_entropy,
            "sigma": self.sigma,
            "phi": self.phi,
        }


def phi(d: Dist) -> PhiReport:
    """Evaluate ``<w> - (<h(X)> + h(<X>))/2`` and its ingredients on ``d``."""
    mean_w = d.mean_w
    branch = math.fsum(float(p) * binary_entropy(s.X) for s, p in d.items())
    ensemble = binary_entropy(d.mean_x)
    sigma = (branch + ensemble) / 2
    return PhiReport(mean_w, branch, ensemble, sigma, float(mean_w) - sigma)


def sigma(d: Dist) -> float:
    return phi(d).sigma


def w_zero(d0: Dist) -> float | Fraction:
    """Zero-point of the work counter: the ``<w>`` at which ``phi(d0) == 0``.

    Exact (a Fraction) whenever both entropy terms are rational, which is the
    case when every X and the mean X lie in {0, 1/2, 1}.
    """
    branch = sum((p * _rational_h(s.X) for s, p in d0.items()), ZERO)
    ens = _rational_h(d0.mean_x)
    if ens is None:
        return phi(d0).sigma
    return (branch + ens) / 2


def _rational_h(x: Fraction):
    if x in (ZERO, ONE):
        return ZERO
    if x == HALF:
        return ONE
    return None
