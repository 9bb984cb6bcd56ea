"""The closed-term model: normal forms of K/S terms with inert atoms.

Elements are K, S, atoms, and applications already in normal form.  Applying
``a`` to ``b`` normalizes ``(a b)`` by leftmost-outermost reduction, one fuel
unit per contraction.  Normal-order reduction finds a normal form whenever one
exists, so running out of fuel is the only way an application can fail.

Reduction works on a graph: when S copies its third argument, both copies
point at one cell, and contracting that cell updates it for every user.
Without this, call-by-name duplication makes recursive kit programs take
time exponential in their input.

Everything here is iterative.  Reduction sequences of 10^5 steps build terms
whose depth would overflow the interpreter stack under recursion.
"""

from __future__ import annotations

import re

from .core import DEFAULT_FUEL, Fuel, FuelExhausted, OutOfFuel, PpcaModel

TK = "K"
TS = "S"
TERM_PARAM = "*"


class Atom:
    """An inert constant.  Atoms with equal names are equal."""

    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name

    def __eq__(self, other):
        return isinstance(other, Atom) and other.name == self.name

    def __hash__(self):
        return hash(("atom", self.name))

    def __repr__(self):
        return f"Atom({self.name!r})"


class Ap(tuple):
    """Application node whose normality is unknown."""

    __slots__ = ()

    def __new__(cls, f, x):
        return tuple.__new__(cls, (f, x))

    def __repr__(self):
        return f"{type(self).__name__}({self[0]!r}, {self[1]!r})"


class NAp(Ap):
    """Application node known to be in normal form."""

    __slots__ = ()


class Node:
    """Mutable application cell used during reduction.

    A contraction overwrites the redex cell in place, so every reference to a
    shared subterm sees the reduced form.  ``f is None`` marks an indirection
    to ``x``; ``nf`` caches the normal form once known.
    """

    __slots__ = ("f", "x", "nf")

    def __init__(self, f, x):
        self.f = f
        self.x = x
        self.nf = None


def _deref(t):
    while type(t) is Node:
        if t.f is None:
            t = t.x
        elif t.nf is not None:
            return t.nf
        else:
            return t
    return t


def _to_graph(t):
    """Turn unknown ``Ap`` tuples into cells; normal parts are kept as is."""
    if type(t) is not Ap:
        return t
    out: list = []
    stack: list = [(t, False)]
    while stack:
        n, seen = stack.pop()
        if type(n) is not Ap:
            out.append(n)
        elif seen:
            x = out.pop()
            f = out.pop()
            out.append(Node(f, x))
        else:
            stack.append((n, True))
            stack.append((n[1], False))
            stack.append((n[0], False))
    return out[0]


def _arg(app):
    return app.x if type(app) is Node else app[1]


def _hnf(t, meter: Fuel):
    """Head-reduce the graph ``t``; return ``(head, args)`` with args in order."""
    stack: list = []
    cur = _deref(t)
    while True:
        while True:
            if type(cur) is Node:
                stack.append(cur)
                cur = _deref(cur.f)
            elif isinstance(cur, Ap):
                stack.append(cur)
                cur = cur[0]
            else:
                break
        n = len(stack)
        if cur == TK and n >= 2:
            meter.tick()
            x = _arg(stack[-1])
            r = stack[-2]
            r.f = None
            r.x = x
            del stack[-2:]
            cur = _deref(x)
        elif cur == TS and n >= 3:
            meter.tick()
            x = _arg(stack[-1])
            y = _arg(stack[-2])
            r = stack[-3]
            z = r.x
            r.f = Node(x, z)
            r.x = Node(y, z)
            del stack[-3:]
            cur = r
        else:
            return cur, [_arg(a) for a in reversed(stack)]


def head_reduce(t, meter: Fuel):
    """Head normal form of a term: ``(head, args)``; args may be unreduced."""
    return _hnf(_to_graph(t), meter)


def _normalize(t, meter: Fuel):
    frames: list[list] = []
    have = False
    res = None
    cur = t
    while True:
        if have:
            frame = frames.pop()
            frame[2][frame[3]] = res
            frame[3] += 1
            have = False
        else:
            c = _deref(cur)
            if type(c) is Node:
                head, args = _hnf(c, meter)
                frame = [c, head, args, 0]
            else:
                frame = None
                res = c
        if frame is not None:
            node, head, args, i = frame
            while i < len(args):
                a = _deref(args[i])
                if type(a) is Node:
                    break
                args[i] = a
                i += 1
            if i < len(args):
                frame[3] = i
                frames.append(frame)
                cur = args[i]
                continue
            res = head
            for a in args:
                res = NAp(res, a)
            node.nf = res
        if not frames:
            return res
        have = True


def normalize(t, meter: Fuel):
    """Full normal form of ``t`` (normal order with sharing), or :class:`OutOfFuel`."""
    return _normalize(_to_graph(t), meter)


def bohm_agree(t1, t2, depth: int, fuel: int | Fuel = DEFAULT_FUEL) -> bool | None:
    """Compare head normal forms of two terms down to ``depth`` levels.

    Returns False on a visible mismatch, True when all compared levels agree,
    and None when fuel ran out first.  Terms with infinite normal forms, such
    as ``Y f``, can still be compared this way.
    """
    meter = fuel if isinstance(fuel, Fuel) else Fuel(fuel)
    todo = [(_to_graph(t1), _to_graph(t2), depth)]
    try:
        while todo:
            a, b, d = todo.pop()
            if d <= 0:
                continue
            ha, aa = _hnf(a, meter)
            hb, ab = _hnf(b, meter)
            if ha != hb or len(aa) != len(ab):
                return False
            for x, y in zip(aa, ab):
                todo.append((x, y, d - 1))
    except OutOfFuel:
        return None
    return True


# ---------------------------------------------------------------------------
# text


def term_to_text(t) -> str:
    parts: list[str] = []
    stack: list = [t]
    while stack:
        n = stack.pop()
        if isinstance(n, Ap):
            stack.extend([")", n[1], " ", n[0]])
            parts.append("(")
        elif isinstance(n, Atom):
            parts.append(n.name)
        else:
            parts.append(n)
    return "".join(parts)


_TERM_TOKEN = re.compile(r"\s*(\(|\)|[A-Za-z_0-9][A-Za-z_0-9'.\-]*)")


def term_from_text(text: str):
    """Parse a term (applications may be n-ary) and normalize it."""
    pos = 0
    stack: list[list] = [[]]
    text = text.strip()
    while pos < len(text):
        m = _TERM_TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"bad term text at offset {pos}: {text[pos:pos + 10]!r}")
        tok = m.group(1)
        pos = m.end()
        if tok == "(":
            stack.append([])
        elif tok == ")":
            items = stack.pop()
            if not items or not stack:
                raise ValueError("unbalanced parentheses in term")
            stack[-1].append(_fold(items))
        else:
            stack[-1].append(tok if tok in (TK, TS) else Atom(tok))
        while pos < len(text) and text[pos].isspace():
            pos += 1
    if len(stack) != 1 or not stack[0]:
        raise ValueError("unbalanced or empty term")
    t = _fold(stack[0])
    meter = Fuel(DEFAULT_FUEL)
    try:
        return normalize(t, meter)
    except OutOfFuel:
        raise ValueError("term has no normal form within the default fuel") from None


def _fold(items):
    out = items[0]
    for x in items[1:]:
        out = Ap(out, x)
    return out


class TermModel(PpcaModel):
    """Closed S/K terms in normal form, with a singleton parameter set."""

    name = "term"
    K = TK
    S = TS

    def __init__(self):
        super().__init__([TERM_PARAM])

    def _apply(self, param, a, b, meter: Fuel):
        meter.tick()
        return _normalize(Node(a, b), meter)

    def to_text(self, element) -> str:
        return term_to_text(element)

    def from_text(self, text: str):
        return term_from_text(text)

    def is_element(self, obj) -> bool:
        stack = [obj]
        while stack:
            n = stack.pop()
            if isinstance(n, Ap):
                if type(n) is not NAp:
                    return False
                head, args = n, []
                while isinstance(head, Ap):
                    args.append(head[1])
                    head = head[0]
                if head == TK and len(args) >= 2 or head == TS and len(args) >= 3:
                    return False
                if not (head in (TK, TS) or isinstance(head, Atom)):
                    return False
                stack.extend(args)
            elif not (n in (TK, TS) or isinstance(n, Atom)):
                return False
        return True

    def param_from_text(self, text: str):
        if text.strip() != TERM_PARAM:
            raise ValueError("the term model has the single parameter '*'")
        return TERM_PARAM


def term_model() -> TermModel:
    return TermModel()


__all__ = [
    "Atom",
    "Ap",
    "NAp",
    "TK",
    "TS",
    "TERM_PARAM",
    "TermModel",
    "term_model",
    "normalize",
    "head_reduce",
    "bohm_agree",
    "term_to_text",
    "term_from_text",
    "FuelExhausted",
]
