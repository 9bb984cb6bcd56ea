"""Exact interval-cover algorithms over the rationals.

Everything is computed with :class:`fractions.Fraction`; no floating point.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

OPEN = "open"
CLOSED = "closed"


class PreconditionViolated(ValueError):
    pass


@dataclass(frozen=True, order=True)
class RatInterval:
    lo: Fraction
    hi: Fraction
    kind: str = OPEN

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.kind not in (OPEN, CLOSED):
            raise ValueError(f"interval kind must be open or closed, got {self.kind!r}")
        if self.lo > self.hi:
            raise ValueError(f"interval endpoints out of order: {self.lo} > {self.hi}")

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __contains__(self, x) -> bool:
        if self.kind == OPEN:
            return self.lo < x < self.hi
        return self.lo <= x <= self.hi

    def to_text(self) -> str:
        return f"{self.kind} {fmt(self.lo)} {fmt(self.hi)}"

    def __str__(self):
        l, r = ("(", ")") if self.kind == OPEN else ("[", "]")
        return f"{l}{fmt(self.lo)}, {fmt(self.hi)}{r}"


def op(lo, hi) -> RatInterval:
    return RatInterval(lo, hi, OPEN)


def cl(lo, hi) -> RatInterval:
    return RatInterval(lo, hi, CLOSED)


def fmt(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------------------
# cover files


def parse_cover(text: str) -> list[RatInterval]:
    """One interval per line: ``open a/b c/d`` or ``closed a/b c/d``.

    Blank lines and ``#`` comments are skipped.  Errors name the line.
    """
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3 or parts[0] not in (OPEN, CLOSED):
            raise ValueError(f"line {lineno}: expected 'open|closed lo hi', got {raw.strip()!r}")
        try:
            lo, hi = Fraction(parts[1]), Fraction(parts[2])
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"line {lineno}: bad rational in {raw.strip()!r}") from None
        try:
            out.append(RatInterval(lo, hi, parts[0]))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return out


def format_cover(intervals: Iterable[RatInterval]) -> str:
    return "".join(iv.to_text() + "\n" for iv in intervals)


# ---------------------------------------------------------------------------
# the uncovered point


def _minus_closed(piece: RatInterval, a: Fraction, b: Fraction) -> list[RatInterval]:
    """``(u, v) \\ [a, b]`` as zero, one or two open intervals, left to right."""
    u, v = piece.lo, piece.hi
    if b <= u or v <= a:
        return [piece]
    out = []
    if u < a:
        out.append(op(u, a))
    if b < v:
        out.append(op(b, v))
    return out


def uncovered_phases(closed: Sequence[RatInterval], window: RatInterval) -> list[list[RatInterval]]:
    """The disjoint open pieces left after removing each closed interval in turn.

    Phase ``k`` lists ``window`` minus the first ``k`` closed intervals, in
    left-to-right order.  Degenerate pieces never appear.
    """
    pieces = [op(window.lo, window.hi)] if window.lo < window.hi else []
    phases = [pieces]
    for iv in closed:
        pieces = [q for p in pieces for q in _minus_closed(p, iv.lo, iv.hi)]
        phases.append(pieces)
    return phases


def uncovered_point(closed: Sequence[RatInterval], window: RatInterval) -> Fraction:
    """A point of the open ``window`` outside every closed interval.

    Requires the closed lengths to sum to less than the window's length; the
    answer is the midpoint of the leftmost surviving piece.
    """
    total = sum((iv.length for iv in closed), Fraction(0))
    if not total < window.length:
        raise PreconditionViolated(
            f"closed intervals have total length {fmt(total)}, window only {fmt(window.length)}"
        )
    last = uncovered_phases(closed, window)[-1]
    # the length bound guarantees a surviving piece
    return last[0].midpoint


# ---------------------------------------------------------------------------
# singular covers


def singular_cover(points: Sequence, eps) -> list[RatInterval]:
    """Open intervals of radius ``eps 2^(-i-2)`` around ``points[i]``.

    Their lengths ``eps 2^(-i-1)`` sum to ``eps (1 - 2^-n)`` over any prefix
    of length ``n``.
    """
    eps = Fraction(eps)
    if not 0 < eps < 1:
        raise ValueError("eps must lie strictly between 0 and 1")
    out = []
    for i, mu in enumerate(points):
        mu = Fraction(mu)
        r = eps / 2 ** (i + 2)
        out.append(op(mu - r, mu + r))
    return out


# ---------------------------------------------------------------------------
# finite subcovers


@dataclass(frozen=True)
class Covered:
    indices: tuple[int, ...]

    ok = True


@dataclass(frozen=True)
class Gap:
    witness: Fraction
    segment: tuple[Fraction, Fraction]

    ok = False


def finite_subcover(cover: Sequence[RatInterval], n: int | None = None) -> Covered | Gap:
    """Does the union of the first ``n`` open intervals contain ``[0, 1]``?

    A greedy sweep from 0: at each uncovered point ``c`` pick the interval
    reaching furthest right among those with ``lo < c``.  If none passes ``c``,
    ``c`` is uncovered; the gap reported is the maximal uncovered segment
    starting there, and its midpoint is the witness.
    """
    items = list(cover if n is None else cover[:n])
    for iv in items:
        if iv.kind != OPEN:
            raise ValueError("finite_subcover takes open intervals")
    order = sorted(range(len(items)), key=lambda i: items[i].lo)
    cur = Fraction(0)
    used = []
    pos = 0
    best = None
    while cur <= 1:
        while pos < len(order) and items[order[pos]].lo < cur:
            i = order[pos]
            if best is None or items[i].hi > items[best].hi:
                best = i
            pos += 1
        if best is None or items[best].hi <= cur:
            nxt = items[order[pos]].lo if pos < len(order) else Fraction(1)
            end = min(nxt, Fraction(1))
            return Gap((cur + end) / 2, (cur, end))
        used.append(best)
        cur = items[best].hi
    return Covered(tuple(sorted(set(used))))


# ---------------------------------------------------------------------------
# well-behaved normalization


def first_primes(n: int) -> list[int]:
    out: list[int] = []
    c = 2
    while len(out) < n:
        if all(c % p for p in out if p * p <= c):
            out.append(c)
        c += 1
    return out


@lru_cache(maxsize=None)
def _prime_data(i: int) -> tuple[int, int]:
    """``(p_i, P_i)``: the ``i``-th prime and the product of the first ``i``."""
    ps = first_primes(i)
    return ps[-1], math.prod(ps)


def cd_interval(i: int, m: int) -> RatInterval:
    """``((1 + 2m p_i) / P_i, (1 + (2m+3) p_i) / P_i)`` for stage ``i >= 1``."""
    if i < 1:
        raise ValueError("stages start at 1")
    p, P = _prime_data(i)
    return op(Fraction(1 + 2 * m * p, P), Fraction(1 + (2 * m + 3) * p, P))


def cd_range(i: int, lo: Fraction, hi: Fraction) -> range:
    """All ``m`` with ``cd_interval(i, m)`` inside ``[lo, hi]``."""
    p, P = _prime_data(i)
    m_lo = math.ceil((lo * P - 1) / (2 * p))
    m_hi = math.floor(((hi * P - 1) / p - 3) / 2)
    return range(m_lo, m_hi + 1)


def union_components(intervals: Iterable[RatInterval]) -> list[tuple[Fraction, Fraction]]:
    """Connected components of a union of open intervals."""
    ivs = sorted((iv.lo, iv.hi) for iv in intervals if iv.lo < iv.hi)
    out: list[list[Fraction]] = []
    for lo, hi in ivs:
        # open intervals that merely touch leave their shared endpoint out
        if out and lo < out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return [(a, b) for a, b in out]


def normalize_phases(cover: Sequence[RatInterval], stages: int) -> list[list[RatInterval]]:
    """Phase ``i`` (``1..stages``) emits the stage-``i`` intervals inside the union
    of inputs ``0..i`` and inside no interval emitted before."""
    if stages < 1:
        raise ValueError("stages must be at least 1")
    cover = list(cover)
    phases: list[list[RatInterval]] = []
    # earlier phases, each sorted by left endpoint; within a phase all
    # intervals have one width, so right endpoints are sorted too
    prior_lo: list[list[Fraction]] = []
    prior_hi: list[list[Fraction]] = []
    for i in range(1, stages + 1):
        comps = union_components(cover[: i + 1])
        emitted = []
        for lo, hi in comps:
            for m in cd_range(i, lo, hi):
                iv = cd_interval(i, m)
                if not _inside_prior(iv, prior_lo, prior_hi):
                    emitted.append(iv)
        emitted.sort()
        phases.append(emitted)
        prior_lo.append([iv.lo for iv in emitted])
        prior_hi.append([iv.hi for iv in emitted])
    return phases


def _inside_prior(iv: RatInterval, prior_lo, prior_hi) -> bool:
    for los, his in zip(prior_lo, prior_hi):
        j = bisect.bisect_right(los, iv.lo) - 1
        if j >= 0 and his[j] >= iv.hi:
            return True
    return False


def normalize_well_behaved(cover: Sequence[RatInterval], stages: int) -> list[RatInterval]:
    return [iv for phase in normalize_phases(cover, stages) for iv in phase]


@dataclass(frozen=True)
class WellBehavedReport:
    endpoint_hits: tuple  # indices with an endpoint at 0 or 1
    abutting: tuple  # (i, j) with hi_i == lo_j
    contained: tuple  # (i, j) with interval i inside interval j

    @property
    def ok(self) -> bool:
        return not (self.endpoint_hits or self.abutting or self.contained)


def well_behaved_report(intervals: Sequence[RatInterval]) -> WellBehavedReport:
    """The three clauses, each reported with the offending indices."""
    hits = tuple(i for i, iv in enumerate(intervals) if iv.lo in (0, 1) or iv.hi in (0, 1))
    by_lo: dict[Fraction, list[int]] = {}
    for i, iv in enumerate(intervals):
        by_lo.setdefault(iv.lo, []).append(i)
    abut = tuple((i, j) for i, iv in enumerate(intervals) for j in by_lo.get(iv.hi, ()))
    order = sorted(range(len(intervals)), key=lambda i: (intervals[i].lo, -intervals[i].hi))
    contained = []
    best = None
    for i in order:
        if best is not None and intervals[i].hi <= intervals[best].hi:
            contained.append((i, best))
        elif best is None or intervals[i].hi > intervals[best].hi:
            best = i
    return WellBehavedReport(hits, abut, tuple(contained))


# ---------------------------------------------------------------------------
# tent sums


def tent(iv: RatInterval, x) -> Fraction:
    """Height of the unit tent on ``iv`` at ``x``: 1 at the centre, 0 off ``iv``."""
    x = Fraction(x)
    r = iv.length / 2
    if r == 0:
        return Fraction(0)
    return max(Fraction(0), 1 - abs(x - iv.midpoint) / r)


def tent_sum(cover: Sequence[RatInterval], x, terms: int) -> Fraction:
    """``sum_{n < terms} 2^-n tent_n(x)``: positive exactly on the first ``terms`` intervals."""
    if terms < 1:
        raise ValueError("need at least one term")
    return sum((tent(iv, x) / 2**n for n, iv in enumerate(cover[:terms])), Fraction(0))
