"""A Goedel-numbered oracle machine language.

Programs are small applicative terms.  A program runs on one natural-number
input and may consult an oracle.  The interesting constructs are

* ``apply(f, x)``: run the program whose code is the value of ``f`` on the
  value of ``x`` (the universal machine);
* ``tmpl(body, args)``: evaluate ``args`` and return the *code* of ``body``
  with its holes filled by the resulting literals.  Holes inside a nested
  template's body belong to that template and are left alone, but the nested
  template's argument list is filled.  This is the smn theorem made concrete.

Binary layout of a term, in preorder: a 5-bit tag, then per tag

* literal: Elias-delta of ``n + 1``
* hole: Elias-gamma of ``i + 1``
* template: the body, Elias-gamma of ``len(args) + 1``, then the args
* everything else: its fixed number of children.

The code of a term is ``int("1" + bits, 2)``.  Decoding must consume every
bit; a code that does not parse decodes to ``REJECT``, a program that never
yields a value.  Hence ``encode(decode(n)) == n`` for every valid code.

Delta coding keeps literal size linear in the bit length of the literal, which
matters because numerals in the oracle model are codes nested inside codes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from . import codec
from .core import DEFAULT_FUEL, EvalOutcome, Fuel, FuelExhausted, OutOfFuel, Rejected, Undefined, Value

# tags
T_INPUT = 0
T_LIT = 1
T_HOLE = 2
T_TMPL = 3
T_APPLY = 4
T_ORACLE = 5
T_PAIR = 6
T_FST = 7
T_SND = 8
T_SUCC = 9
T_PRED = 10
T_ISZERO = 11
T_IF = 12
T_ADD = 13
T_SUB = 14
T_MUL = 15
T_DIV = 16
T_MOD = 17
T_LT = 18
T_EQ = 19
T_POW2 = 20
T_QADD = 21
T_QSUB = 22
T_QMUL = 23
T_QDIV = 24
T_QLT = 25
T_QOFNAT = 26
T_ITER = 27
T_REJECT = 28

NAMES = {
    T_INPUT: "in",
    T_LIT: "lit",
    T_HOLE: "hole",
    T_TMPL: "tmpl",
    T_APPLY: "apply",
    T_ORACLE: "oracle",
    T_PAIR: "pair",
    T_FST: "fst",
    T_SND: "snd",
    T_SUCC: "succ",
    T_PRED: "pred",
    T_ISZERO: "iszero",
    T_IF: "if",
    T_ADD: "add",
    T_SUB: "sub",
    T_MUL: "mul",
    T_DIV: "div",
    T_MOD: "mod",
    T_LT: "lt",
    T_EQ: "eq",
    T_POW2: "pow2",
    T_QADD: "qadd",
    T_QSUB: "qsub",
    T_QMUL: "qmul",
    T_QDIV: "qdiv",
    T_QLT: "qlt",
    T_QOFNAT: "qofnat",
    T_ITER: "iter",
    T_REJECT: "reject",
}
TAGS = {v: k for k, v in NAMES.items()}

ARITY = {
    T_INPUT: 0,
    T_REJECT: 0,
    T_ORACLE: 1,
    T_FST: 1,
    T_SND: 1,
    T_SUCC: 1,
    T_PRED: 1,
    T_ISZERO: 1,
    T_POW2: 1,
    T_QOFNAT: 1,
    T_APPLY: 2,
    T_PAIR: 2,
    T_ADD: 2,
    T_SUB: 2,
    T_MUL: 2,
    T_DIV: 2,
    T_MOD: 2,
    T_LT: 2,
    T_EQ: 2,
    T_QADD: 2,
    T_QSUB: 2,
    T_QMUL: 2,
    T_QDIV: 2,
    T_QLT: 2,
    T_IF: 3,
    T_ITER: 3,
}

TAG_BITS = 5
# rational primitives refuse codes this large; unranking them is too slow to
# be worth a machine step
RAT_CODE_LIMIT = 1 << 50
POW2_LIMIT = 1 << 16

# ---------------------------------------------------------------------------
# term constructors (terms are plain tuples headed by their tag)

INPUT = (T_INPUT,)
REJECT = (T_REJECT,)


def lit(n: int):
    if n < 0:
        raise ValueError("literals are naturals")
    return (T_LIT, n)


def hole(i: int):
    return (T_HOLE, i)


def tmpl(body, *args):
    return (T_TMPL, body, tuple(args))


def _op(tag):
    def build(*children):
        if len(children) != ARITY[tag]:
            raise TypeError(f"{NAMES[tag]} takes {ARITY[tag]} arguments")
        return (tag, *children)

    build.__name__ = NAMES[tag]
    return build


apply_ = _op(T_APPLY)
oracle = _op(T_ORACLE)
pair = _op(T_PAIR)
fst = _op(T_FST)
snd = _op(T_SND)
succ = _op(T_SUCC)
pred = _op(T_PRED)
iszero = _op(T_ISZERO)
if_ = _op(T_IF)
add = _op(T_ADD)
sub = _op(T_SUB)
mul = _op(T_MUL)
div = _op(T_DIV)
mod = _op(T_MOD)
lt = _op(T_LT)
eq = _op(T_EQ)
pow2 = _op(T_POW2)
qadd = _op(T_QADD)
qsub = _op(T_QSUB)
qmul = _op(T_QMUL)
qdiv = _op(T_QDIV)
qlt = _op(T_QLT)
qofnat = _op(T_QOFNAT)
iter_ = _op(T_ITER)

H0 = hole(0)
H1 = hole(1)
H2 = hole(2)

# ---------------------------------------------------------------------------
# bit coding


def _gamma(n: int) -> str:
    b = bin(n)[2:]
    return "0" * (len(b) - 1) + b


def _delta(n: int) -> str:
    b = bin(n)[2:]
    return _gamma(len(b)) + b[1:]


class _BadCode(Exception):
    pass


def _read_gamma(bits: str, pos: int) -> tuple[int, int]:
    z = pos
    n = len(bits)
    while z < n and bits[z] == "0":
        z += 1
    width = z - pos + 1
    end = pos + 2 * width - 1
    if z >= n or end > n:
        raise _BadCode
    return int(bits[z:end], 2), end


def _read_delta(bits: str, pos: int) -> tuple[int, int]:
    length, pos = _read_gamma(bits, pos)
    end = pos + length - 1
    if end > len(bits):
        raise _BadCode
    return int("1" + bits[pos:end], 2), end


def encode_bits(term) -> str:
    out: list[str] = []
    stack: list = [term]
    while stack:
        t = stack.pop()
        if isinstance(t, int):  # deferred template arg count
            out.append(_gamma(t + 1))
            continue
        tag = t[0]
        out.append(format(tag, "05b"))
        if tag == T_LIT:
            out.append(_delta(t[1] + 1))
        elif tag == T_HOLE:
            out.append(_gamma(t[1] + 1))
        elif tag == T_TMPL:
            args = t[2]
            stack.extend(reversed(args))
            stack.append(len(args))
            stack.append(t[1])
        else:
            stack.extend(reversed(t[1:]))
    return "".join(out)


def encode(term) -> int:
    """Goedel number of a machine term."""
    return int("1" + encode_bits(term), 2)


def _decode_bits(bits: str):
    pos = 0
    n = len(bits)
    # frame: [tag, children, needed]; template frames get their count after the body
    stack: list[list] = []
    root = None
    while True:
        if pos + TAG_BITS > n:
            raise _BadCode
        tag = int(bits[pos : pos + TAG_BITS], 2)
        pos += TAG_BITS
        if tag == T_LIT:
            v, pos = _read_delta(bits, pos)
            node = (T_LIT, v - 1)
        elif tag == T_HOLE:
            v, pos = _read_gamma(bits, pos)
            node = (T_HOLE, v - 1)
        elif tag == T_TMPL:
            stack.append([T_TMPL, [], 1])
            continue
        elif tag in ARITY:
            k = ARITY[tag]
            if k:
                stack.append([tag, [], k])
                continue
            node = (tag,)
        else:
            raise _BadCode
        # bubble completed nodes up
        while True:
            if not stack:
                root = node
                break
            frame = stack[-1]
            frame[1].append(node)
            if frame[0] == T_TMPL and len(frame[1]) == 1 and frame[2] == 1:
                cnt, pos = _read_gamma(bits, pos)
                frame[2] = cnt  # body + (cnt - 1) args
            if len(frame[1]) < frame[2]:
                break
            stack.pop()
            if frame[0] == T_TMPL:
                node = (T_TMPL, frame[1][0], tuple(frame[1][1:]))
            else:
                node = (frame[0], *frame[1])
        if root is not None:
            break
    if pos != n:
        raise _BadCode
    return root


@lru_cache(maxsize=1 << 15)
def decode(code: int):
    """Machine term of a code; invalid codes give ``REJECT``."""
    if code < 2:
        return REJECT
    try:
        return _decode_bits(bin(code)[3:])
    except _BadCode:
        return REJECT


def is_valid_code(code: int) -> bool:
    if code < 2:
        return False
    try:
        _decode_bits(bin(code)[3:])
    except _BadCode:
        return False
    return True


def program_to_text(term) -> str:
    parts: list[str] = []
    stack: list = [term]
    while stack:
        t = stack.pop()
        if isinstance(t, str):
            parts.append(t)
            continue
        tag = t[0]
        if tag == T_LIT:
            parts.append(str(t[1]))
        elif tag == T_HOLE:
            parts.append(f"#{t[1]}")
        elif tag in (T_INPUT, T_REJECT):
            parts.append(NAMES[tag])
        elif tag == T_TMPL:
            parts.append("(tmpl ")
            items: list = [t[1], " ("]
            for i, a in enumerate(t[2]):
                if i:
                    items.append(" ")
                items.append(a)
            items.append("))")
            stack.extend(reversed(items))
        else:
            parts.append("(" + NAMES[tag])
            items = []
            for c in t[1:]:
                items.append(" ")
                items.append(c)
            items.append(")")
            stack.extend(reversed(items))
    return "".join(parts)


def program_from_text(text: str):
    """Inverse of :func:`program_to_text`."""
    toks = text.replace("(", " ( ").replace(")", " ) ").split()
    pos = 0

    def parse():
        nonlocal pos
        if pos >= len(toks):
            raise ValueError("unexpected end of program text")
        tok = toks[pos]
        pos += 1
        if tok == "(":
            head = toks[pos]
            pos += 1
            if head == "tmpl":
                body = parse()
                if toks[pos] != "(":
                    raise ValueError("tmpl expects a parenthesized argument list")
                pos += 1
                args = []
                while toks[pos] != ")":
                    args.append(parse())
                pos += 2  # closes the arg list and the form
                return tmpl(body, *args)
            if head not in TAGS:
                raise ValueError(f"unknown instruction {head}")
            children = []
            while toks[pos] != ")":
                children.append(parse())
            pos += 1
            return _op(TAGS[head])(*children)
        if tok == "in":
            return INPUT
        if tok == "reject":
            return REJECT
        if tok.startswith("#"):
            return hole(int(tok[1:]))
        if tok.isdigit():
            return lit(int(tok))
        raise ValueError(f"unexpected token {tok}")

    out = parse()
    if pos != len(toks):
        raise ValueError("trailing tokens in program text")
    return out


# ---------------------------------------------------------------------------
# oracles


class OutOfPrefix(Exception):
    """A finite-prefix oracle was queried past its end."""


@dataclass(frozen=True)
class Oracle:
    """A binary sequence: finite prefix followed by a repeating period."""

    prefix: tuple[int, ...] = ()
    period: tuple[int, ...] = (0,)

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(int(b) for b in self.prefix))
        object.__setattr__(self, "period", tuple(int(b) for b in self.period))
        if not self.period:
            raise ValueError("oracle period must be non-empty")
        if any(b not in (0, 1) for b in self.prefix + self.period):
            raise ValueError("oracle bits must be 0 or 1")

    def bit(self, i: int) -> int:
        if i < len(self.prefix):
            return self.prefix[i]
        return self.period[(i - len(self.prefix)) % len(self.period)]

    def bits(self, n: int) -> tuple[int, ...]:
        return tuple(self.bit(i) for i in range(n))

    def to_text(self) -> str:
        p = "".join(map(str, self.prefix))
        q = "".join(map(str, self.period))
        return f"prefix={p}; period={q}"

    @classmethod
    def from_text(cls, text: str) -> "Oracle":
        fields = {}
        for part in text.split(";"):
            if not part.strip():
                continue
            key, sep, val = part.partition("=")
            if not sep:
                raise ValueError(f"bad oracle field {part.strip()!r}")
            fields[key.strip()] = val.strip()
        if set(fields) - {"prefix", "period"} or "period" not in fields:
            raise ValueError("oracle text needs 'period=' and optionally 'prefix='")
        return cls(tuple(fields.get("prefix", "")), tuple(fields["period"]))

    def __str__(self):
        return self.to_text()


@dataclass(frozen=True)
class PrefixOracle:
    """Only a finite prefix is known; reading past it raises OutOfPrefix."""

    prefix: tuple[int, ...]

    def bit(self, i: int) -> int:
        if i < len(self.prefix):
            return self.prefix[i]
        raise OutOfPrefix(i)


class RecordingOracle:
    """Wraps an oracle and remembers which indices were read."""

    def __init__(self, inner):
        self.inner = inner
        self.queried: set[int] = set()

    def bit(self, i: int) -> int:
        self.queried.add(i)
        return self.inner.bit(i)


class NoOracle:
    """Stand-in for computations that must not consult an oracle."""

    def bit(self, i: int) -> int:
        raise Rejected("oracle consulted by an oracle-free computation")


# ---------------------------------------------------------------------------
# the interpreter

_EV = 0
_OP = 1
_FILL = 2
_BRANCH = 3
_ITER = 4
_RET = 5


def _fill(term, vals: Sequence[int]):
    tag = term[0]
    if tag == T_HOLE:
        i = term[1]
        return (T_LIT, vals[i]) if i < len(vals) else term
    if tag in (T_INPUT, T_LIT, T_REJECT):
        return term
    if tag == T_TMPL:
        return (T_TMPL, term[1], tuple(_fill(a, vals) for a in term[2]))
    return (tag, *(_fill(c, vals) for c in term[1:]))


@lru_cache(maxsize=1 << 16)
def _fill_encode(body, args: tuple[int, ...]) -> int:
    try:
        return encode(_fill(body, args))
    except RecursionError:
        raise Rejected("template too deep") from None


def _rat(code: int):
    if code >= RAT_CODE_LIMIT:
        raise Rejected("rational code out of machine range")
    return codec.rat_decode(code)


def _rat_code(q) -> int:
    code = codec.rat_encode(q)
    if code >= RAT_CODE_LIMIT:
        raise Rejected("rational result out of machine range")
    return code


def _binop(tag, a: int, b: int) -> int:
    if tag == T_PAIR:
        return codec.pair_encode(a, b)
    if tag == T_ADD:
        return a + b
    if tag == T_SUB:
        return a - b if a > b else 0
    if tag == T_MUL:
        return a * b
    if tag == T_DIV:
        if b == 0:
            raise Rejected("division by zero")
        return a // b
    if tag == T_MOD:
        if b == 0:
            raise Rejected("modulus zero")
        return a % b
    if tag == T_LT:
        return 1 if a < b else 0
    if tag == T_EQ:
        return 1 if a == b else 0
    if tag == T_QADD:
        return _rat_code(_rat(a) + _rat(b))
    if tag == T_QSUB:
        return _rat_code(_rat(a) - _rat(b))
    if tag == T_QMUL:
        return _rat_code(_rat(a) * _rat(b))
    if tag == T_QDIV:
        d = _rat(b)
        if d == 0:
            raise Rejected("rational division by zero")
        return _rat_code(_rat(a) / d)
    if tag == T_QLT:
        return 1 if _rat(a) < _rat(b) else 0
    raise AssertionError(tag)


def _unop(tag, a: int, orc, meter: Fuel) -> int:
    if tag == T_ORACLE:
        return orc.bit(a)
    if tag == T_FST:
        return codec.pair_decode(a)[0]
    if tag == T_SND:
        return codec.pair_decode(a)[1]
    if tag == T_SUCC:
        return a + 1
    if tag == T_PRED:
        return a - 1 if a else 0
    if tag == T_ISZERO:
        return 1 if a == 0 else 0
    if tag == T_POW2:
        if a > POW2_LIMIT:
            raise Rejected("exponent out of machine range")
        meter.tick(a >> 6)
        return 1 << a
    if tag == T_QOFNAT:
        return _rat_code(a)
    raise AssertionError(tag)


# Exact memo of universal-machine calls, keyed by (oracle, code, input).  A hit
# replays the recorded step count, so fuel outcomes are the same as without the
# memo.  Only plain periodic oracles are memoized: prefix and recording oracles
# must see every query.
_CALL_MEMO: dict = {}
CALL_MEMO_LIMIT = 1 << 16


def clear_call_memo() -> None:
    _CALL_MEMO.clear()


def run_term(term, x: int, orc, meter: Fuel) -> int:
    """Run a decoded program on input ``x``.

    Every evaluation step costs one unit of fuel; nested ``apply`` calls
    share the meter.  Raises :class:`Rejected`, :class:`OutOfFuel` or
    :class:`OutOfPrefix`.
    """
    vals: list[int] = []
    todo: list[tuple] = [(_EV, term, x)]
    tick = meter.tick
    memo = _CALL_MEMO if type(orc) is Oracle else None

    def call(f, arg):
        if memo is not None:
            key = (orc, f, arg)
            hit = memo.get(key)
            if hit is not None:
                tick(hit[1])
                vals.append(hit[0])
                return
            todo.append((_RET, key, meter.used))
        todo.append((_EV, decode(f), arg))

    while todo:
        op, node, inp = todo.pop()
        if op == _EV:
            tick()
            tag = node[0]
            if tag == T_INPUT:
                vals.append(inp)
            elif tag == T_LIT:
                vals.append(node[1])
            elif tag == T_TMPL:
                todo.append((_FILL, node, inp))
                for a in reversed(node[2]):
                    todo.append((_EV, a, inp))
            elif tag == T_IF:
                todo.append((_BRANCH, node, inp))
                todo.append((_EV, node[1], inp))
            elif tag == T_ITER:
                todo.append((_ITER, None, inp))
                todo.append((_EV, node[3], inp))
                todo.append((_EV, node[2], inp))
                todo.append((_EV, node[1], inp))
            elif tag == T_HOLE:
                raise Rejected("unfilled hole")
            elif tag == T_REJECT:
                raise Rejected("reject")
            else:
                todo.append((_OP, node, inp))
                for c in reversed(node[1:]):
                    todo.append((_EV, c, inp))
        elif op == _OP:
            tag = node[0]
            if tag == T_APPLY:
                arg = vals.pop()
                call(vals.pop(), arg)
            elif ARITY[tag] == 2:
                b = vals.pop()
                a = vals.pop()
                vals.append(_binop(tag, a, b))
            else:
                vals.append(_unop(tag, vals.pop(), orc, meter))
        elif op == _FILL:
            n = len(node[2])
            args = vals[len(vals) - n :] if n else []
            if n:
                del vals[len(vals) - n :]
            vals.append(_fill_encode(node[1], tuple(args)))
        elif op == _BRANCH:
            c = vals.pop()
            todo.append((_EV, node[2] if c else node[3], inp))
        elif op == _RET:
            if len(memo) >= CALL_MEMO_LIMIT:
                memo.clear()
            memo[node] = (vals[-1], meter.used - inp)
        else:  # _ITER: stack holds n, f, acc
            acc = vals.pop()
            f = vals.pop()
            n = vals.pop()
            if n == 0:
                vals.append(acc)
            else:
                vals.append(n - 1)
                vals.append(f)
                todo.append((_ITER, None, inp))
                call(f, acc)
    return vals[-1]


def run_code(code: int, x: int, orc, meter: Fuel) -> int:
    """Run the program coded by ``code``, going through the call memo."""
    if type(orc) is not Oracle:
        return run_term(decode(code), x, orc, meter)
    key = (orc, code, x)
    hit = _CALL_MEMO.get(key)
    if hit is not None:
        meter.tick(hit[1])
        return hit[0]
    used = meter.used
    out = run_term(decode(code), x, orc, meter)
    if len(_CALL_MEMO) >= CALL_MEMO_LIMIT:
        _CALL_MEMO.clear()
    _CALL_MEMO[key] = (out, meter.used - used)
    return out


def run(code: int, x: int, orc, fuel: int | Fuel = DEFAULT_FUEL) -> EvalOutcome:
    """``phi^orc_code(x)`` as an outcome."""
    meter = fuel if isinstance(fuel, Fuel) else Fuel(fuel)
    try:
        return Value(run_code(code, x, orc, meter))
    except OutOfFuel:
        return FuelExhausted(meter.used)
    except Rejected as exc:
        return Undefined(str(exc))


STAR = "*"  # the truncated-run "no answer" marker


def trunc_run(code: int, orc, x: int, steps: int):
    """Run for at most ``steps`` steps; ``STAR`` on timeout or prefix overrun.

    A program that rejects also yields ``STAR``: it never produces a value.
    """
    meter = Fuel(steps)
    try:
        return run_code(code, x, orc, meter)
    except (OutOfFuel, OutOfPrefix, Rejected):
        return STAR


def steps_to_halt(code: int, orc, x: int, fuel: int = DEFAULT_FUEL) -> int | None:
    """Exact number of steps a run takes, or None if it does not halt in ``fuel``."""
    meter = Fuel(fuel)
    try:
        run_code(code, x, orc, meter)
    except (OutOfFuel, OutOfPrefix, Rejected):
        return None
    return meter.used
