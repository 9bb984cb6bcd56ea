"""Realizers of real numbers, the apartness comparator, diagonalizers and
the oracle interval domain.

A real realizer maps a precision ``k`` (a plain natural) to the code of a
rational within ``2^-k`` of the real.  Two kinds are provided: machine
programs run in the oracle model, and host rules for tests and the term
model.  All interval arithmetic here is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from . import codec
from . import machine as M
from .core import (
    DEFAULT_FUEL,
    Counterexample,
    Fuel,
    FuelExhausted,
    Inconclusive,
    OutOfFuel,
    Undefined,
    Value,
    Verified,
)
from .machine import STAR, Oracle, OutOfPrefix, RecordingOracle, trunc_run

ZERO = Fraction(0)
ONE = Fraction(1)


def _pow2(k: int) -> Fraction:
    return Fraction(1, 1 << k) if k >= 0 else Fraction(1 << -k)


# ---------------------------------------------------------------------------
# realizers


class RealRealizer:
    """Something that produces rational approximations at each precision."""

    target: Fraction | None = None

    def approx(self, param, k: int, fuel: int | Fuel = DEFAULT_FUEL):
        """Outcome whose value is the rational approximation at precision ``k``."""
        raise NotImplementedError


class ProgramRealizer(RealRealizer):
    """A machine code ``r``; ``r`` applied to ``k`` is a rational code."""

    def __init__(self, code: int, target: Fraction | None = None):
        self.code = code
        self.target = target

    def approx(self, param, k, fuel=DEFAULT_FUEL):
        o = M.run(self.code, k, param, fuel)
        if not isinstance(o, Value):
            return o
        try:
            return Value(codec.rat_decode(o.value))
        except ValueError as exc:
            return Undefined(str(exc))

    def __repr__(self):
        return f"ProgramRealizer({self.code})"


class RuleRealizer(RealRealizer):
    """A host function ``(param, k) -> Fraction``; costs one fuel unit per call."""

    def __init__(self, rule: Callable, target: Fraction | None = None):
        self.rule = rule
        self.target = target

    def approx(self, param, k, fuel=DEFAULT_FUEL):
        meter = fuel if isinstance(fuel, Fuel) else Fuel(fuel)
        try:
            meter.tick()
        except OutOfFuel:
            return FuelExhausted(meter.used)
        return Value(Fraction(self.rule(param, k)))


def constant_program(q) -> int:
    """Code of the program ignoring its input and returning ``q``."""
    return M.encode(M.lit(codec.rat_encode(Fraction(q))))


def binary_program(q) -> int:
    """Code of ``k -> floor(q 2^(k+1)) / 2^(k+1)`` for ``q >= 0``."""
    q = Fraction(q)
    if q < 0:
        raise ValueError("binary_program needs a nonnegative rational")
    scale = M.pow2(M.succ(M.INPUT))
    floor = M.div(M.mul(M.lit(q.numerator), scale), M.lit(q.denominator))
    return M.encode(M.qdiv(M.qofnat(floor), M.qofnat(scale)))


def shifted_program(q, shift_sign: int = 1) -> int:
    """Code of ``k -> q + 2^-k`` (or minus): off by exactly the allowed error."""
    err = M.qdiv(M.qofnat(M.lit(1)), M.qofnat(M.pow2(M.INPUT)))
    base = M.lit(codec.rat_encode(Fraction(q)))
    return M.encode(M.qadd(base, err) if shift_sign > 0 else M.qsub(base, err))


def binary_rule(q) -> RuleRealizer:
    q = Fraction(q)

    def rule(param, k):
        s = 1 << (k + 1)
        return Fraction((q.numerator * s) // q.denominator, s)

    return RuleRealizer(rule, q)


def check_real_realizer(r: RealRealizer, q, depth: int, params: Sequence, fuel: int = DEFAULT_FUEL):
    """Verify ``|q - r(k)| < 2^-k`` for ``k = 0..depth`` at every parameter."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    q = Fraction(q)
    for k in range(depth + 1):
        for p in params:
            o = r.approx(p, k, fuel)
            if isinstance(o, FuelExhausted):
                return Inconclusive(f"fuel exhausted at precision {k}")
            if not isinstance(o, Value):
                return Counterexample(k, r, p, "approximation undefined")
            if not abs(q - o.value) < _pow2(k):
                return Counterexample(k, r, p, f"approximation {o.value} misses by at least 2^-{k}")
    return Verified(r)


# ---------------------------------------------------------------------------
# apartness comparator


@dataclass(frozen=True)
class Less:
    """The first real is below ``witness``, which is below the second."""

    witness: Fraction
    k: int


@dataclass(frozen=True)
class Greater:
    witness: Fraction
    k: int


def compare_apart(r: RealRealizer, s: RealRealizer, param, fuel: int | Fuel = DEFAULT_FUEL):
    """Search for the least ``k`` where the approximations are more than ``2^(1-k)`` apart.

    Probing precision ``k`` charges ``k + 1`` fuel units on top of whatever the
    two realizers spend, all from one pool.  Equal reals therefore exhaust the
    fuel rather than loop.
    """
    meter = fuel if isinstance(fuel, Fuel) else Fuel(fuel)
    k = 0
    while True:
        try:
            meter.tick(k + 1)
        except OutOfFuel:
            return FuelExhausted(meter.used)
        a = r.approx(param, k, meter)
        if not isinstance(a, Value):
            return a
        b = s.approx(param, k, meter)
        if not isinstance(b, Value):
            return b
        x, y = a.value, b.value
        if abs(x - y) > 2 * _pow2(k):
            if x < y:
                return Less(x + _pow2(k), k)
            return Greater(x - _pow2(k), k)
        k += 1


# ---------------------------------------------------------------------------
# diagonalizers


def cantor_avoid(a: Sequence, n_steps: int | None = None) -> list[tuple[Fraction, Fraction]]:
    """Nested intervals ``[x_n, y_n]`` whose limit avoids every ``a_n``.

    Starts from ``[0, 1/4]``; the first branch wins whenever both guards hold.
    Returns ``n_steps + 1`` intervals (default: one per input plus the start).
    """
    n_steps = len(a) if n_steps is None else n_steps
    if n_steps > len(a):
        raise ValueError("need one sequence term per step")
    x, y = ZERO, Fraction(1, 4)
    out = [(x, y)]
    for n in range(n_steps):
        an = Fraction(a[n])
        if (3 * x + 2 * y) / 5 < an:
            x, y = x, (4 * x + y) / 5
        else:
            # here a_n <= (3x+2y)/5 < (2x+3y)/5, so the second guard holds
            x, y = (x + 4 * y) / 5, y
        out.append((x, y))
    return out


def cauchy_avoid(s: Callable[[int, int], Fraction], n_steps: int) -> list[tuple[Fraction, Fraction]]:
    """Pairs ``(t_n, u_n)`` from an approximation table ``s(n, k)``.

    ``t_0 = s(0, 0) + 1`` and ``u_0 = t_0 + 1/4``.
    """
    t = Fraction(s(0, 0)) + 1
    u = t + Fraction(1, 4)
    out = [(t, u)]
    for n in range(n_steps):
        d = (u - t) / 4
        m = 0
        while not _pow2(m) < d:
            m += 1
        if t + 2 * d < Fraction(s(n, m)):
            t, u = t, t + d
        else:
            t, u = u - d, u
        out.append((t, u))
    return out


# ---------------------------------------------------------------------------
# the interval domain


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("empty interval")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi

    def meet(self, other: "Interval") -> "Interval | None":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return Interval(lo, hi) if lo <= hi else None

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def subset_of(self, other: "Interval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def __str__(self):
        return f"[{_frac(self.lo)}, {_frac(self.hi)}]"


UNIT = Interval(ZERO, ONE)


def _frac(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class TraceStep:
    index: int  # the argument of H, a pair <j, k>
    steps: int  # j
    precision: int  # k
    output: object  # the truncated run's value or STAR
    H: Interval | None  # None when the clipped bracket misses [0, 1]
    I: Interval  # I(index + 1)


@dataclass(frozen=True)
class IntervalTrace:
    start: Interval
    steps: tuple[TraceStep, ...]
    queried: frozenset

    def I(self, k: int) -> Interval:
        return self.start if k == 0 else self.steps[k - 1].I

    def to_text(self) -> str:
        lines = [f"0 {_frac(self.start.lo)} {_frac(self.start.hi)}"]
        for st in self.steps:
            lines.append(f"{st.index + 1} {_frac(st.I.lo)} {_frac(st.I.hi)}")
        return "\n".join(lines) + "\n"


def h_interval(code: int, orc, idx: int) -> tuple[int, int, object, Interval | None]:
    j, k = codec.pair_decode(idx)
    m = trunc_run(code, orc, k, j)
    if m is STAR:
        return j, k, STAR, UNIT
    try:
        q = codec.rat_decode(m)
    except ValueError:
        return j, k, m, UNIT
    return j, k, m, Interval(q - _pow2(k), q + _pow2(k)).meet(UNIT)


def interval_I(code: int, orc, depth: int) -> IntervalTrace:
    """``I(0..depth)`` for the program ``code`` under ``orc``.

    ``orc`` may be a full oracle or a finite prefix; reading past a prefix
    makes that truncated run a star.
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    rec = RecordingOracle(orc)
    cur = UNIT
    steps = []
    for idx in range(depth):
        j, k, out, H = h_interval(code, rec, idx)
        nxt = cur.meet(H) if H is not None else None
        if nxt is not None:
            cur = nxt
        steps.append(TraceStep(idx, j, k, out, H, cur))
    return IntervalTrace(UNIT, tuple(steps), frozenset(rec.queried))


def adequate_depth(code: int, orc, k: int, fuel: int = DEFAULT_FUEL) -> int | None:
    """Smallest depth whose trace has consumed the halting run at precision ``k``."""
    j = M.steps_to_halt(code, orc, k, fuel)
    return None if j is None else codec.pair_encode(j, k) + 1


def interval_J_approx(code: int, oracles: Sequence, depth: int) -> Interval:
    """Convex hull of ``I(depth)`` over finitely many oracles."""
    if not oracles:
        raise ValueError("need at least one oracle")
    out = None
    for orc in oracles:
        iv = interval_I(code, orc, depth).I(depth)
        out = iv if out is None else out.hull(iv)
    return out


# ---------------------------------------------------------------------------
# oracles coding reals and sequences


class NonDyadic(ValueError):
    pass


def dyadic_digits(q) -> tuple[int, ...]:
    """Binary digits ``d_0 d_1 ...`` with ``q = sum d_i 2^(-i-1)``, finite."""
    q = Fraction(q)
    if not (0 <= q < 1):
        raise NonDyadic(f"{q} is outside [0, 1)")
    den = q.denominator
    if den & (den - 1):
        raise NonDyadic(f"{q} is not dyadic")
    bits = den.bit_length() - 1
    num = q.numerator
    return tuple((num >> (bits - 1 - i)) & 1 for i in range(bits))


def oracle_from_sequence(dyadics: Sequence) -> Oracle:
    """``alpha(<n, m>)`` is the ``m``-th binary digit of the ``n``-th input."""
    digits = [dyadic_digits(q) for q in dyadics]
    ones = [codec.pair_encode(n, m) for n, ds in enumerate(digits) for m, d in enumerate(ds) if d]
    if not ones:
        return Oracle((), (0,))
    prefix = [0] * (max(ones) + 1)
    for i in ones:
        prefix[i] = 1
    return Oracle(tuple(prefix), (0,))


def oracle_real(orc: Oracle) -> Fraction:
    """The exact real ``sum alpha(i) 2^(-i-1)`` of an eventually periodic oracle."""
    pre, per = orc.prefix, orc.period
    head = sum(Fraction(b, 2 ** (i + 1)) for i, b in enumerate(pre))
    cycle = sum(Fraction(b, 2 ** (i + 1)) for i, b in enumerate(per))
    # the periodic tail starts at position len(pre) and repeats every len(per)
    tail = cycle / (1 - Fraction(1, 2 ** len(per)))
    return head + tail / 2 ** len(pre)


def partial_sum(orc, n: int, offset: Callable[[int], int] = lambda i: i) -> Fraction:
    return sum((Fraction(orc.bit(offset(i)), 2 ** (i + 1)) for i in range(n + 2)), ZERO)


def real_from_oracle(orc, n: int) -> int:
    """Rational code of ``sum_{i <= n+1} alpha(i) 2^(-i-1)``."""
    return codec.rat_encode(partial_sum(orc, n))


def sequence_term(orc, n: int, precision: int) -> Fraction:
    """Approximation of the ``n``-th real coded by ``orc``."""
    return partial_sum(orc, precision, lambda i: codec.pair_encode(n, i))


def sequence_digits(orc, n: int, count: int) -> tuple[int, ...]:
    return tuple(orc.bit(codec.pair_encode(n, m)) for m in range(count))


def _sum_step(key, position, advance) -> int:
    """Code of one summation step on the accumulator ``<key, sum code>``.

    ``key`` is the oracle index read at this step, ``position`` the digit
    position ``i`` and ``advance`` the next key.
    """
    bit_value = M.if_(
        M.oracle(key),
        M.qdiv(M.qofnat(M.lit(1)), M.qofnat(M.pow2(M.succ(position)))),
        M.lit(codec.rat_encode(0)),
    )
    return M.encode(M.pair(advance, M.qadd(M.snd(M.INPUT), bit_value)))


_ZERO_CODE = codec.rat_encode(0)

# n -> code of the partial sum of alpha(0..n+1); the key is i itself
_W_STEP = _sum_step(M.fst(M.INPUT), M.fst(M.INPUT), M.succ(M.fst(M.INPUT)))
W_CODE = M.encode(
    M.snd(M.iter_(M.succ(M.succ(M.INPUT)), M.lit(_W_STEP), M.pair(M.lit(0), M.lit(_ZERO_CODE))))
)

# <n, k> -> code of the k-th approximation of the n-th coded real; the key is <n, i>
_KEY = M.fst(M.INPUT)
_G_STEP = _sum_step(_KEY, M.snd(_KEY), M.pair(M.fst(_KEY), M.succ(M.snd(_KEY))))
G_CODE = M.encode(
    M.snd(
        M.iter_(
            M.succ(M.succ(M.snd(M.INPUT))),
            M.lit(_G_STEP),
            M.pair(M.pair(M.fst(M.INPUT), M.lit(0)), M.lit(_ZERO_CODE)),
        )
    )
)


def sequence_program(n: int) -> int:
    """Program approximating the ``n``-th real of the coded sequence."""
    from .oraclemodel import smn

    return smn(G_CODE, n)


# n -> sequence_program(n), computed by the machine
V_CODE = M.encode(M.tmpl(M.apply_(M.lit(G_CODE), M.pair(M.H0, M.INPUT)), M.INPUT))


__all__ = [
    "RealRealizer",
    "ProgramRealizer",
    "RuleRealizer",
    "constant_program",
    "binary_program",
    "shifted_program",
    "binary_rule",
    "check_real_realizer",
    "Less",
    "Greater",
    "compare_apart",
    "cantor_avoid",
    "cauchy_avoid",
    "Interval",
    "UNIT",
    "TraceStep",
    "IntervalTrace",
    "interval_I",
    "interval_J_approx",
    "adequate_depth",
    "h_interval",
    "NonDyadic",
    "dyadic_digits",
    "oracle_from_sequence",
    "oracle_real",
    "real_from_oracle",
    "sequence_term",
    "sequence_digits",
    "sequence_program",
    "W_CODE",
    "V_CODE",
    "STAR",
    "OutOfPrefix",
]
