"""Applicative expressions over a ppca.

An expression is a variable, a constant or a binary application.  Constants
either hold a carrier element of some model or one of the two symbolic basic
combinators ``K`` and ``S``, which every model resolves to its own elements.

Canonical text is fully parenthesized binary application::

    (((S K) K) `a`)

Carrier literals are quoted with backticks.  The parser is more lenient: it
accepts ``(f x y)`` for ``((f x) y)`` and the compile-time sugar
``(lam x y body)``, which is removed by bracket abstraction on the spot.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Iterator, Mapping, Sequence

from .core import (
    DEFAULT_FUEL,
    EvalOutcome,
    Fuel,
    FuelExhausted,
    OutOfFuel,
    PpcaModel,
    Rejected,
    Undefined,
    Value,
)


class Prim:
    """Symbolic basic combinator, resolved per model."""

    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name

    def __repr__(self):
        return self.name

    def __reduce__(self):
        return (_prim, (self.name,))


def _prim(name):
    return PRIM_K if name == "K" else PRIM_S


PRIM_K = Prim("K")
PRIM_S = Prim("S")


@dataclass(frozen=True, slots=True)
class Var:
    name: str


@dataclass(frozen=True, slots=True)
class Const:
    value: Any


@dataclass(frozen=True, slots=True)
class App:
    left: "CombExpr"
    right: "CombExpr"


CombExpr = Var | Const | App

K = Const(PRIM_K)
S = Const(PRIM_S)


def as_expr(x) -> CombExpr:
    if isinstance(x, (Var, Const, App)):
        return x
    if isinstance(x, str):
        return Var(x)
    raise TypeError(f"cannot use {x!r} as an expression; wrap carrier elements in Const")


def ap(f, *args) -> CombExpr:
    """Left-associated application; bare strings are variables."""
    out = as_expr(f)
    for a in args:
        out = App(out, as_expr(a))
    return out


def spine(e: CombExpr) -> tuple[CombExpr, list[CombExpr]]:
    args = []
    while isinstance(e, App):
        args.append(e.right)
        e = e.left
    args.reverse()
    return e, args


# ---------------------------------------------------------------------------
# traversal helpers


def _nodes(e: CombExpr) -> Iterator[CombExpr]:
    stack = [e]
    while stack:
        n = stack.pop()
        yield n
        if isinstance(n, App):
            stack.append(n.right)
            stack.append(n.left)


def free_vars(e: CombExpr) -> set[str]:
    return {n.name for n in _nodes(e) if isinstance(n, Var)}


def is_closed(e: CombExpr) -> bool:
    return not any(isinstance(n, Var) for n in _nodes(e))


def size(e: CombExpr) -> int:
    return sum(1 for _ in _nodes(e))


def depth(e: CombExpr) -> int:
    """Leaves have depth 1."""
    best = 0
    stack = [(e, 1)]
    while stack:
        n, d = stack.pop()
        if isinstance(n, App):
            stack.append((n.left, d + 1))
            stack.append((n.right, d + 1))
        elif d > best:
            best = d
    return best


def _rebuild(e: CombExpr, leaf: Callable[[CombExpr], CombExpr]) -> CombExpr:
    """Rebuild ``e`` bottom-up, replacing each leaf by ``leaf(node)``."""
    out: list[CombExpr] = []
    stack: list[tuple[CombExpr, bool]] = [(e, False)]
    while stack:
        n, seen = stack.pop()
        if isinstance(n, App):
            if seen:
                r = out.pop()
                l = out.pop()
                out.append(n if (l is n.left and r is n.right) else App(l, r))
            else:
                stack.append((n, True))
                stack.append((n.right, False))
                stack.append((n.left, False))
        else:
            out.append(leaf(n))
    return out[0]


def substitute(e: CombExpr, bindings: Mapping[str, Any] | Iterable[tuple[str, Any]]) -> CombExpr:
    """Replace bound variables by constants.

    Binding values that are carrier elements become :class:`Const` leaves;
    values that are already expressions are spliced in unchanged.  Variables
    not mentioned pass through.
    """
    table = dict(bindings)
    if not table:
        return e

    def leaf(n):
        if isinstance(n, Var) and n.name in table:
            v = table[n.name]
            return v if isinstance(v, (Var, Const, App)) else Const(v)
        return n

    return _rebuild(e, leaf)


def abstract(var: str, e: CombExpr) -> CombExpr:
    """Bracket abstraction with the four plain clauses (no optimizations)."""
    skk = App(App(S, K), K)

    def leaf(n):
        if isinstance(n, Var) and n.name == var:
            return skk
        return App(K, n)

    out: list[CombExpr] = []
    stack: list[tuple[CombExpr, bool]] = [(e, False)]
    while stack:
        n, seen = stack.pop()
        if isinstance(n, App):
            if seen:
                r = out.pop()
                l = out.pop()
                out.append(App(App(S, l), r))
            else:
                stack.append((n, True))
                stack.append((n.right, False))
                stack.append((n.left, False))
        else:
            out.append(leaf(n))
    return out[0]


def lam(params: str | Sequence[str], body: CombExpr) -> CombExpr:
    """``lam("x y", e)`` is ``abstract(x, abstract(y, e))``."""
    names = params.split() if isinstance(params, str) else list(params)
    body = as_expr(body)
    for name in reversed(names):
        body = abstract(name, body)
    return body


# ---------------------------------------------------------------------------
# evaluation


def _evaluate(model: PpcaModel, param, e: CombExpr, meter: Fuel):
    vals: list = []
    stack: list[tuple[CombExpr, bool]] = [(e, False)]
    while stack:
        n, seen = stack.pop()
        if isinstance(n, App):
            if seen:
                b = vals.pop()
                a = vals.pop()
                vals.append(model._apply(param, a, b, meter))
            else:
                stack.append((n, True))
                stack.append((n.right, False))
                stack.append((n.left, False))
        elif isinstance(n, Const):
            v = n.value
            if v is PRIM_K:
                v = model.K
            elif v is PRIM_S:
                v = model.S
            vals.append(v)
        else:
            raise ValueError(f"cannot evaluate open expression (free variable {n.name})")
    return vals[0]


def eval_at(model: PpcaModel, param, e: CombExpr, fuel: int | Fuel = DEFAULT_FUEL) -> EvalOutcome:
    """Evaluate a closed expression with every application at ``param``.

    Left subexpressions are evaluated before right ones and all applications
    draw on one shared budget.
    """
    meter = fuel if isinstance(fuel, Fuel) else Fuel(fuel)
    try:
        return Value(_evaluate(model, param, e, meter))
    except OutOfFuel:
        return FuelExhausted(meter.used)
    except Rejected as exc:
        return Undefined(str(exc))


@dataclass(frozen=True)
class Uniformity:
    """Outcome of a uniformity check.

    ``verdict`` is ``True``/``False``, or ``None`` when fuel hid the answer.
    ``witness`` is the common value when the verdict is ``True``.
    """

    verdict: bool | None
    witness: Any = None
    outcomes: tuple = ()

    @property
    def inconclusive(self) -> bool:
        return self.verdict is None

    def __bool__(self):
        return self.verdict is True


def is_uniform(model: PpcaModel, e: CombExpr, params=None, fuel: int = DEFAULT_FUEL) -> Uniformity:
    params = tuple(model.params if params is None else params)
    if not params:
        raise ValueError("need at least one parameter sample")
    outs = tuple(eval_at(model, p, e, fuel) for p in params)
    values = [o.value for o in outs if isinstance(o, Value)]
    if len(values) >= 2 and any(v != values[0] for v in values[1:]):
        return Uniformity(False, None, outs)
    if any(isinstance(o, FuelExhausted) for o in outs):
        return Uniformity(None, None, outs)
    if len(values) == len(outs):
        return Uniformity(True, values[0], outs)
    return Uniformity(False, None, outs)


class NotUniform(Exception):
    pass


def ucode(model: PpcaModel, e: CombExpr, params=None, fuel: int = DEFAULT_FUEL):
    """The common value of a uniform expression, or :class:`NotUniform`."""
    u = is_uniform(model, e, params, fuel)
    if u.verdict is not True:
        raise NotUniform(f"expression is not uniform on the sample: {u.outcomes}")
    return u.witness


# ---------------------------------------------------------------------------
# text form


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


_TOKEN = re.compile(r"(\()|(\))|`([^`]*)`|([A-Za-z_0-9][A-Za-z_0-9:'.\-]*)")


def _tokens(text: str):
    pos = 0
    n = len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            return
        m = _TOKEN.match(text, pos)
        if not m:
            yield ("error", text[pos], pos)
            return
        start = pos
        if m.group(1):
            yield ("(", "(", start)
        elif m.group(2):
            yield (")", ")", start)
        elif m.group(3) is not None:
            yield ("lit", m.group(3), start)
        else:
            yield ("name", m.group(4), start)
        pos = m.end()


def _linecol(text: str, pos: int) -> tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


def parse(text: str, literal: Callable[[str], Any] | None = None,
          resolve: Callable[[str], CombExpr] | None = None) -> CombExpr:
    """Parse expression text.

    ``literal`` turns the contents of a backtick literal into a carrier
    element (default: keep the string).  ``resolve`` handles names that
    contain a colon, such as ``kit:pair``.
    """
    toks = list(_tokens(text))

    def fail(msg, pos):
        raise ParseError(msg, *_linecol(text, pos))

    for kind, val, pos in toks:
        if kind == "error":
            fail(f"unexpected character {val!r}", pos)
    if not toks:
        fail("empty expression", 0)

    def atom(kind, val, pos):
        if kind == "lit":
            try:
                return Const(literal(val) if literal else val)
            except ValueError as exc:
                fail(f"bad literal `{val}`: {exc}", pos)
        if val == "K":
            return K
        if val == "S":
            return S
        if ":" in val:
            if resolve is None:
                fail(f"no resolver for {val}", pos)
            try:
                return resolve(val)
            except (KeyError, ValueError) as exc:
                fail(f"unknown name {val}: {exc}", pos)
        if val == "lam":
            fail("lam must open a parenthesized form", pos)
        return Var(val)

    # frames: [open_pos, items]
    stack: list[tuple[int, list]] = []
    result = None
    for i, (kind, val, pos) in enumerate(toks):
        if result is not None:
            fail("trailing input", pos)
        if kind == "(":
            stack.append((pos, []))
            continue
        if kind == ")":
            if not stack:
                fail("unbalanced ')'", pos)
            open_pos, items = stack.pop()
            node = _close(items, open_pos, fail)
        else:
            if kind == "name" and val == "lam" and stack and not stack[-1][1]:
                stack[-1][1].append(("lam", pos))
                continue
            node = atom(kind, val, pos)
        if stack:
            stack[-1][1].append(node)
        else:
            result = node
    if stack:
        fail("unclosed '('", stack[-1][0])
    return result


def _close(items, open_pos, fail):
    if not items:
        fail("empty application", open_pos)
    if isinstance(items[0], tuple):
        _, lam_pos = items[0]
        rest = items[1:]
        if len(rest) < 2:
            fail("lam needs at least one variable and a body", lam_pos)
        names = []
        for it in rest[:-1]:
            if not isinstance(it, Var):
                fail("lam binders must be variables", lam_pos)
            names.append(it.name)
        return lam(names, rest[-1])
    if len(items) == 1:
        return items[0]
    return ap(*items)


def to_text(e: CombExpr, show: Callable[[Any], str] | None = None) -> str:
    """Canonical text; ``show`` prints carrier elements (default ``str``)."""
    show = show or str
    parts: list[str] = []
    stack: list = [e]
    while stack:
        n = stack.pop()
        if isinstance(n, str):
            parts.append(n)
        elif isinstance(n, App):
            stack.extend([")", n.right, " ", n.left])
            parts.append("(")
        elif isinstance(n, Var):
            parts.append(n.name)
        elif n.value is PRIM_K:
            parts.append("K")
        elif n.value is PRIM_S:
            parts.append("S")
        else:
            parts.append("`" + show(n.value) + "`")
    return "".join(parts)
