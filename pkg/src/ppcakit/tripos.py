"""Realizability predicates over finite universes.

A predicate assigns a set of realizers to every point of a finite universe.
Realizer sets come in three shapes:

* :class:`Finite`: an explicit set;
* :class:`Everything`: the whole carrier, never materialized;
* :class:`Intensional`: a membership test plus the members we know about.

Statements that quantify over a realizer set ("for all b in phi(x)") run over
``samples()``: the explicit members, or for the other two shapes the known
members plus whatever members the context's probe pool contains.  Statements
that quantify over parameters run over the context's parameter sample.  Every
certificate is therefore relative to those two samples.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass
from typing import Any, Callable, Hashable, Iterable, Mapping, Sequence

from .core import (
    DEFAULT_FUEL,
    Counterexample,
    FuelExhausted,
    Inconclusive,
    PpcaModel,
    Value,
    Verified,
    all3,
    any3,
)
from .kit import Kit
from .terms import K, Const, ap, lam


class TriposContext:
    """Model, parameter sample, probe pool and fuel shared by a computation."""

    def __init__(self, model: PpcaModel, params=None, pool: Sequence | None = None,
                 fuel: int = DEFAULT_FUEL, kit: Kit | None = None):
        self.model = model
        self.params = tuple(model.params if params is None else params)
        self.fuel = fuel
        self.kit = kit or Kit(model, self.params, fuel)
        self.pool = tuple(dict.fromkeys(pool)) if pool is not None else default_pool(self.kit)

    def apply(self, p, a, b):
        return self.model.apply(p, a, b, self.fuel)

    def apply_chain(self, p, f, *args):
        """``f a1 a2 ...`` at ``p`` as an outcome."""
        return self.kit.call(p, f, *args, fuel=self.fuel)

    def value(self, e):
        return self.kit.value_of(e)


def default_pool(kit: Kit) -> tuple:
    """A small deterministic probe pool: kit constants, numerals and a few extras."""
    items = [kit.model.K, kit.model.S]
    for name in ("id", "true", "false", "pair", "fst", "snd"):
        items.append(kit[name])
    items.extend(kit.numeral(n) for n in range(3))
    model = kit.model
    if model.name == "oracle":
        # 0 decodes to the rejecting program, so it is a realizer whose
        # applications are all undefined
        items.extend([0, 1, 2, 5])
    elif model.name == "term":
        items.extend(model.from_text(t) for t in ("a", "b", "(K a)"))
    return tuple(dict.fromkeys(items))


def outcome_in(outcome, rset: "RealizerSet") -> bool | None:
    """``e realizes rset at p`` given the outcome of evaluating ``e`` at ``p``."""
    if isinstance(outcome, Value):
        return rset.contains(outcome.value)
    if isinstance(outcome, FuelExhausted):
        return None
    return False


# ---------------------------------------------------------------------------
# realizer sets


class RealizerSet(abc.ABC):
    @abc.abstractmethod
    def contains(self, a) -> bool | None:
        ...

    @abc.abstractmethod
    def samples(self) -> tuple:
        ...

    @property
    @abc.abstractmethod
    def empty(self) -> bool | None:
        """Whether the set is empty; None when that cannot be decided."""


class Finite(RealizerSet):
    def __init__(self, elems: Iterable = ()):
        self.elems = tuple(dict.fromkeys(elems))
        self._set = frozenset(self.elems)

    def contains(self, a) -> bool:
        return a in self._set

    def samples(self) -> tuple:
        return self.elems

    @property
    def empty(self) -> bool:
        return not self.elems

    def __eq__(self, other):
        return isinstance(other, Finite) and other._set == self._set

    def __hash__(self):
        return hash(self._set)

    def __repr__(self):
        return f"Finite({list(self.elems)!r})"


class Everything(RealizerSet):
    """The whole carrier; sampled through the probe pool."""

    def __init__(self, pool: Sequence = ()):
        self.pool = tuple(pool)

    def contains(self, a) -> bool:
        return True

    def samples(self) -> tuple:
        return self.pool

    @property
    def empty(self) -> bool:
        return False

    def __repr__(self):
        return "Everything()"


class Intensional(RealizerSet):
    def __init__(self, test: Callable[[Any], bool | None], known: Iterable = (),
                 pool: Sequence = (), empty: bool | None = None):
        self.test = test
        self.known = tuple(dict.fromkeys(known))
        self.pool = tuple(pool)
        self._empty = empty
        self._samples: tuple | None = None
        self._memo: dict = {}

    def contains(self, a) -> bool | None:
        if a not in self._memo:
            self._memo[a] = self.test(a)
        return self._memo[a]

    def samples(self) -> tuple:
        if self._samples is None:
            out = [a for a in self.known if self.contains(a) is True]
            out.extend(a for a in self.pool if a not in self.known and self.contains(a) is True)
            self._samples = tuple(dict.fromkeys(out))
        return self._samples

    @property
    def empty(self) -> bool | None:
        if self._empty is not None:
            return self._empty
        if self.samples():
            return False
        return None

    def __repr__(self):
        return f"Intensional(known={len(self.known)})"


def intersection_empty(sets: Sequence[RealizerSet]) -> bool | None:
    """Whether a finite intersection of realizer sets is empty."""
    if not sets:
        return False
    if any(s.empty is True for s in sets):
        return True
    finite = [s for s in sets if isinstance(s, Finite)]
    if finite:
        base = finite[0].elems
        verdicts = [all3(s.contains(a) for s in sets) for a in base]
        if any(v is True for v in verdicts):
            return False
        return True if all(v is False for v in verdicts) else None
    everything = [s for s in sets if isinstance(s, Everything)]
    rest = [s for s in sets if not isinstance(s, Everything)]
    if not rest:
        return False if everything else None
    for a in rest[0].samples():
        if all3(s.contains(a) for s in rest) is True:
            return False
    return None


# ---------------------------------------------------------------------------
# predicates


class TriposPredicate:
    """A map from the points of a finite universe to realizer sets."""

    def __init__(self, universe: Sequence[Hashable], sets: Mapping[Hashable, RealizerSet] | Callable,
                 ctx: TriposContext, name: str = ""):
        self.universe = tuple(universe)
        self.ctx = ctx
        self.name = name
        if callable(sets):
            self._make = sets
            self._sets: dict = {}
        else:
            self._make = None
            self._sets = dict(sets)
            missing = [x for x in self.universe if x not in self._sets]
            if missing:
                raise ValueError(f"no realizer set for points {missing}")

    def __call__(self, x) -> RealizerSet:
        if x not in self._sets:
            if self._make is None:
                raise KeyError(x)
            self._sets[x] = self._make(x)
        return self._sets[x]

    @classmethod
    def finite(cls, ctx: TriposContext, table: Mapping[Hashable, Iterable], name: str = ""):
        for x, elems in table.items():
            for a in elems:
                if not ctx.model.is_element(a):
                    raise ValueError(f"{a!r} at {x!r} is not a carrier element")
        return cls(list(table), {x: Finite(v) for x, v in table.items()}, ctx, name)

    def reindex(self, r: "FiniteMap") -> "TriposPredicate":
        """Precomposition with ``r : Y -> X``."""
        if set(r.codomain) != set(self.universe):
            raise ValueError("reindexing map must land in the predicate's universe")
        return TriposPredicate(r.domain, lambda y: self(r(y)), self.ctx)

    def __repr__(self):
        return f"TriposPredicate({self.name or '?'}, |X|={len(self.universe)})"


@dataclass(frozen=True)
class FiniteMap:
    domain: tuple
    codomain: tuple
    table: Mapping

    def __post_init__(self):
        object.__setattr__(self, "domain", tuple(self.domain))
        object.__setattr__(self, "codomain", tuple(self.codomain))
        object.__setattr__(self, "table", dict(self.table))
        cod = set(self.codomain)
        for y in self.domain:
            if y not in self.table:
                raise ValueError(f"map undefined at {y!r}")
            if self.table[y] not in cod:
                raise ValueError(f"map sends {y!r} outside its codomain")

    def __call__(self, y):
        return self.table[y]

    def fiber(self, x) -> tuple:
        return tuple(y for y in self.domain if self.table[y] == x)

    @property
    def surjective(self) -> bool:
        return set(self.table[y] for y in self.domain) == set(self.codomain)

    @classmethod
    def identity(cls, universe):
        return cls(universe, universe, {x: x for x in universe})


# ---------------------------------------------------------------------------
# Heyting structure


def _same_universe(phi: TriposPredicate, psi: TriposPredicate):
    if phi.universe != psi.universe:
        raise ValueError("predicates live on different universes")


def top(ctx: TriposContext, universe) -> TriposPredicate:
    return TriposPredicate(universe, lambda x: Everything(ctx.pool), ctx, "top")


def bot(ctx: TriposContext, universe) -> TriposPredicate:
    return TriposPredicate(universe, lambda x: Finite(), ctx, "bot")


def conj(phi: TriposPredicate, psi: TriposPredicate) -> TriposPredicate:
    _same_universe(phi, psi)
    ctx = phi.ctx
    kit = ctx.kit

    def make(x):
        A, B = phi(x), psi(x)

        def test(a):
            return all3(
                all3(
                    [outcome_in(ctx.apply_chain(p, kit["fst"], a), A), outcome_in(ctx.apply_chain(p, kit["snd"], a), B)]
                )
                for p in ctx.params
            )

        known = _pairs(ctx, A.samples(), B.samples())
        emp = True if (A.empty is True or B.empty is True) else (False if A.empty is False and B.empty is False else None)
        return Intensional(test, known, ctx.pool, emp)

    return TriposPredicate(phi.universe, make, ctx)


def _pairs(ctx: TriposContext, left, right, limit: int = 16):
    out = []
    pair = ctx.kit["pair"]
    for b in left[:4]:
        for c in right[:4]:
            o = ctx.apply_chain(ctx.params[0], pair, b, c)
            if isinstance(o, Value):
                out.append(o.value)
            if len(out) >= limit:
                return out
    return out


def disj(phi: TriposPredicate, psi: TriposPredicate) -> TriposPredicate:
    _same_universe(phi, psi)
    ctx = phi.ctx
    kit = ctx.kit
    tru, fls = kit["true"], kit["false"]

    def make(x):
        A, B = phi(x), psi(x)

        def at(p, a):
            tag = ctx.apply_chain(p, kit["fst"], a)
            if isinstance(tag, FuelExhausted):
                return None
            if not isinstance(tag, Value):
                return False
            second = ctx.apply_chain(p, kit["snd"], a)
            if tag.value == tru:
                return outcome_in(second, A)
            if tag.value == fls:
                return outcome_in(second, B)
            return False

        def test(a):
            return all3(at(p, a) for p in ctx.params)

        known = _pairs(ctx, [tru], A.samples()) + _pairs(ctx, [fls], B.samples())
        if A.empty is True and B.empty is True:
            emp = True
        elif A.empty is False or B.empty is False:
            emp = False
        else:
            emp = None
        return Intensional(test, known, ctx.pool, emp)

    return TriposPredicate(phi.universe, make, ctx)


def imp(phi: TriposPredicate, psi: TriposPredicate) -> TriposPredicate:
    _same_universe(phi, psi)
    ctx = phi.ctx

    def make(x):
        A, B = phi(x), psi(x)
        if A.empty is True:
            return Everything(ctx.pool)

        def test(a):
            return all3(outcome_in(ctx.apply(p, a, b), B) for p in ctx.params for b in A.samples())

        known = [ctx.value(ap(K, Const(c))) for c in B.samples()[:4]]
        if A.empty is False and B.empty is True:
            emp = True
        elif B.empty is False:
            emp = False
        else:
            emp = None
        return Intensional(test, known, ctx.pool, emp)

    return TriposPredicate(phi.universe, make, ctx)


def neg(phi: TriposPredicate) -> TriposPredicate:
    """All of the carrier where ``phi(x)`` is empty, nothing elsewhere."""
    ctx = phi.ctx

    def make(x):
        e = phi(x).empty
        if e is True:
            return Everything(ctx.pool)
        if e is False:
            return Finite()
        return Intensional(lambda a: None, (), (), None)

    return TriposPredicate(phi.universe, make, ctx)


def heyting(op: str, phi: TriposPredicate, psi: TriposPredicate | None = None) -> TriposPredicate:
    if op == "top":
        return top(phi.ctx, phi.universe)
    if op == "bot":
        return bot(phi.ctx, phi.universe)
    if op == "neg":
        return neg(phi)
    if psi is None:
        raise ValueError(f"{op} needs two predicates")
    return {"and": conj, "or": disj, "imp": imp}[op](phi, psi)


# ---------------------------------------------------------------------------
# entailment


def check_entailment(phi: TriposPredicate, psi: TriposPredicate, witness) -> Verified | Counterexample | Inconclusive:
    """Does ``witness`` realize ``phi <= psi``?  Exhaustive over the samples."""
    _same_universe(phi, psi)
    ctx = phi.ctx
    unknown = None
    for x in phi.universe:
        target = psi(x)
        for b in phi(x).samples():
            for p in ctx.params:
                o = ctx.apply(p, witness, b)
                v = outcome_in(o, target)
                if v is False:
                    return Counterexample(x, b, p)
                if v is None and unknown is None:
                    unknown = (x, b, p)
    if unknown is not None:
        return Inconclusive(f"fuel exhausted at point {unknown[0]!r}")
    return Verified(witness)


class Synth:
    """Realizers for the structural rules, built from given realizers."""

    def __init__(self, ctx: TriposContext):
        self.ctx = ctx
        self.kit = ctx.kit

    def _c(self, name):
        return self.kit.const(name)

    def reflexivity(self):
        return self.ctx.value(lam("x", "x"))

    def truth(self):
        """Realizes both ``bot <= phi`` and ``phi <= top``."""
        return self.ctx.value(ap(K, K))

    def transitivity(self, a, b):
        return self.ctx.value(lam("x", ap(Const(b), ap(Const(a), "x"))))

    def conj_intro(self, a, b):
        return self.ctx.value(lam("u", ap(self._c("pair"), ap(Const(a), "u"), ap(Const(b), "u"))))

    def conj_left(self, a):
        return self.ctx.value(lam("u", ap(self._c("fst"), ap(Const(a), "u"))))

    def conj_right(self, a):
        return self.ctx.value(lam("v", ap(self._c("snd"), ap(Const(a), "v"))))

    def disj_elim(self, a, b):
        return self.ctx.value(
            lam(
                "u",
                ap(
                    self._c("if"),
                    ap(self._c("fst"), "u"),
                    ap(Const(a), ap(self._c("snd"), "u")),
                    ap(Const(b), ap(self._c("snd"), "u")),
                ),
            )
        )

    def disj_left(self, c):
        return self.ctx.value(lam("u", ap(Const(c), ap(self._c("pair"), self._c("true"), "u"))))

    def disj_right(self, c):
        return self.ctx.value(lam("v", ap(Const(c), ap(self._c("pair"), self._c("false"), "v"))))

    def curry(self, b):
        return self.ctx.value(lam("u v", ap(Const(b), ap(self._c("pair"), "u", "v"))))

    def uncurry(self, a):
        return self.ctx.value(lam("x", ap(Const(a), ap(self._c("fst"), "x"), ap(self._c("snd"), "x"))))

    def forall_counit(self, a):
        """From ``psi <= forall_r phi`` to ``r* psi <= phi``."""
        return self.ctx.value(lam("x", ap(Const(a), "x", K)))

    def forall_unit(self, b):
        """From ``r* psi <= phi`` to ``psi <= forall_r phi``."""
        return self.ctx.value(lam("x d", ap(Const(b), "x")))

    def forall_to_simple(self):
        return self.ctx.value(lam("x", ap("x", K)))


SYNTH_RULES = {
    "refl": ("reflexivity", 0),
    "truth": ("truth", 0),
    "trans": ("transitivity", 2),
    "and-intro": ("conj_intro", 2),
    "and-left": ("conj_left", 1),
    "and-right": ("conj_right", 1),
    "or-elim": ("disj_elim", 2),
    "or-left": ("disj_left", 1),
    "or-right": ("disj_right", 1),
    "curry": ("curry", 1),
    "uncurry": ("uncurry", 1),
}


def synthesize(ctx: TriposContext, rule: str, *witnesses):
    method, arity = SYNTH_RULES[rule]
    if len(witnesses) != arity:
        raise ValueError(f"rule {rule} takes {arity} witnesses")
    return getattr(Synth(ctx), method)(*witnesses)


# ---------------------------------------------------------------------------
# quantifiers along maps


def exists_along(r: FiniteMap, phi: TriposPredicate) -> TriposPredicate:
    if tuple(r.domain) != phi.universe:
        raise ValueError("map domain must be the predicate's universe")
    ctx = phi.ctx

    def make(x):
        parts = [phi(y) for y in r.fiber(x)]
        if all(isinstance(s, Finite) for s in parts):
            return Finite(a for s in parts for a in s.elems)
        if any(isinstance(s, Everything) for s in parts):
            return Everything(ctx.pool)
        known = [a for s in parts for a in s.samples()]
        emp = all3(s.empty for s in parts) if parts else True
        return Intensional(lambda a: any3(s.contains(a) for s in parts), known, ctx.pool, emp)

    return TriposPredicate(r.codomain, make, ctx)


def forall_along(r: FiniteMap, phi: TriposPredicate) -> TriposPredicate:
    """The guarded universal quantifier: ``a b`` must realize ``phi(y)`` for every ``b``."""
    if tuple(r.domain) != phi.universe:
        raise ValueError("map domain must be the predicate's universe")
    ctx = phi.ctx

    def make(x):
        fib = r.fiber(x)
        if not fib:
            return Everything(ctx.pool)
        parts = [phi(y) for y in fib]

        def test(a):
            return all3(
                outcome_in(ctx.apply(q, a, b), s) for s in parts for b in ctx.pool for q in ctx.params
            )

        common = _common_members(parts)
        known = [ctx.value(ap(K, Const(c))) for c in common[:4]]
        emp = intersection_empty(parts)
        return Intensional(test, known, ctx.pool, emp)

    return TriposPredicate(r.codomain, make, ctx)


def forall_prime(r: FiniteMap, phi: TriposPredicate) -> TriposPredicate:
    """The simple universal quantifier: plain membership in every fiber set."""
    if tuple(r.domain) != phi.universe:
        raise ValueError("map domain must be the predicate's universe")
    ctx = phi.ctx

    def make(x):
        fib = r.fiber(x)
        if not fib:
            return Everything(ctx.pool)
        parts = [phi(y) for y in fib]
        if all(isinstance(s, Finite) for s in parts):
            return Finite(_common_members(parts))
        return Intensional(lambda a: all3(s.contains(a) for s in parts), _common_members(parts),
                           ctx.pool, intersection_empty(parts))

    return TriposPredicate(r.codomain, make, ctx)


def _common_members(parts: Sequence[RealizerSet]) -> list:
    if not parts:
        return []
    return [a for a in parts[0].samples() if all3(s.contains(a) for s in parts[1:]) is True]


class NonSurjective(Exception):
    pass


@dataclass(frozen=True)
class ForallComparison:
    simple_below_guarded: object
    guarded_below_simple: object


def compare_foralls(r: FiniteMap, phi: TriposPredicate, require_surjective: bool = True) -> ForallComparison:
    """Certify ``forall' <= forall`` by K and ``forall <= forall'`` by ``x -> x K``.

    The second direction only holds for surjective ``r``; asking for it on a
    non-surjective map raises :class:`NonSurjective` unless
    ``require_surjective`` is off, in which case the failing certificate is
    returned.
    """
    if require_surjective and not r.surjective:
        raise NonSurjective("the comparison of the two universal quantifiers needs a surjective map")
    ctx = phi.ctx
    syn = Synth(ctx)
    fa, fp = forall_along(r, phi), forall_prime(r, phi)
    return ForallComparison(
        check_entailment(fp, fa, ctx.model.K),
        check_entailment(fa, fp, syn.forall_to_simple()),
    )


# ---------------------------------------------------------------------------
# Beck-Chevalley


class NotAPullback(Exception):
    pass


@dataclass(frozen=True)
class Square:
    """``r : Y -> X``, ``u : Y -> Z``, ``v : X -> W``, ``q : Z -> W``."""

    r: FiniteMap
    u: FiniteMap
    v: FiniteMap
    q: FiniteMap

    def check_pullback(self) -> None:
        r, u, v, q = self.r, self.u, self.v, self.q
        if r.domain != u.domain or v.domain != r.codomain or q.domain != u.codomain or set(v.codomain) != set(q.codomain):
            raise NotAPullback("maps do not form a square")
        for y in r.domain:
            if v(r(y)) != q(u(y)):
                raise NotAPullback(f"square does not commute at {y!r}")
        pairs = [(r(y), u(y)) for y in r.domain]
        if len(set(pairs)) != len(pairs):
            raise NotAPullback("two points of Y have the same image pair")
        expected = {(x, z) for x in v.domain for z in q.domain if v(x) == q(z)}
        if set(pairs) != expected:
            raise NotAPullback("Y misses part of the fibered product")


def beck_chevalley(square: Square, phi: TriposPredicate, candidates: Sequence | None = None):
    """Compare the two membership conditions for every point and candidate."""
    square.check_pullback()
    r, u, v, q = square.r, square.u, square.v, square.q
    if phi.universe != tuple(q.domain):
        raise ValueError("phi must live on the corner Z")
    ctx = phi.ctx
    pool = list(candidates) if candidates is not None else list(ctx.pool)
    for z in q.domain:
        pool.extend(phi(z).samples())
    pool = list(dict.fromkeys(pool))
    for x in r.codomain:
        for a in pool:
            left = all3(phi(u(y)).contains(a) for y in r.domain if r(y) == x)
            right = all3(phi(z).contains(a) for z in q.domain if q(z) == v(x))
            if left is None or right is None:
                return Inconclusive(f"membership undecided at {x!r}")
            if left != right:
                return Counterexample(x, a, None, "the two membership conditions differ")
    return Verified()


# ---------------------------------------------------------------------------
# formulas


class FormulaError(ValueError):
    pass


@dataclass(frozen=True)
class F:
    """A formula node: ``op`` and its arguments (subformulas or names)."""

    op: str
    args: tuple = ()

    def __str__(self):
        if self.op in ("top", "bot"):
            return self.op
        if self.op == "atom":
            name, vs = self.args
            return "(" + " ".join((name, *vs)) + ")"
        if self.op in ("forall", "exists"):
            var, uni, body = self.args
            return f"({self.op} {var} {uni} {body})"
        return "(" + " ".join([self.op, *map(str, self.args)]) + ")"


def _sexpr(text: str):
    toks = text.replace("(", " ( ").replace(")", " ) ").split()
    pos = 0

    def go():
        nonlocal pos
        if pos >= len(toks):
            raise FormulaError("unexpected end of formula")
        t = toks[pos]
        pos += 1
        if t == "(":
            out = []
            while pos < len(toks) and toks[pos] != ")":
                out.append(go())
            if pos >= len(toks):
                raise FormulaError("unclosed '('")
            pos += 1
            return out
        if t == ")":
            raise FormulaError("unexpected ')'")
        return t

    tree = go()
    if pos != len(toks):
        raise FormulaError("trailing tokens after formula")
    return tree


_BINARY = {"and", "or", "imp"}


def parse_formula(text: str) -> F:
    def build(t):
        if isinstance(t, str):
            if t in ("top", "bot"):
                return F(t)
            raise FormulaError(f"bare symbol {t!r}; atoms are written (P x ...)")
        if not t:
            raise FormulaError("empty form")
        head = t[0]
        if not isinstance(head, str):
            raise FormulaError("form must start with an operator or predicate name")
        if head in ("top", "bot") and len(t) == 1:
            return F(head)
        if head in _BINARY:
            if len(t) != 3:
                raise FormulaError(f"{head} takes two subformulas")
            return F(head, (build(t[1]), build(t[2])))
        if head == "not":
            if len(t) != 2:
                raise FormulaError("not takes one subformula")
            return F("not", (build(t[1]),))
        if head in ("forall", "exists"):
            if len(t) != 4 or not isinstance(t[1], str) or not isinstance(t[2], str):
                raise FormulaError(f"{head} is written ({head} var Universe body)")
            return F(head, (t[1], t[2], build(t[3])))
        if any(not isinstance(a, str) for a in t[1:]):
            raise FormulaError("predicate arguments must be variables")
        return F("atom", (head, tuple(t[1:])))

    return build(_sexpr(text))


@dataclass
class FormulaEnv:
    """Universes by name and atomic predicates with their argument universes.

    A predicate of arity n lives on the product of its argument universes;
    its points are n-tuples (1-tuples for unary predicates).
    """

    ctx: TriposContext
    universes: dict
    predicates: dict  # name -> (tuple of universe names, TriposPredicate)


def _product(lists):
    out = [()]
    for xs in lists:
        out = [t + (x,) for t in out for x in xs]
    return out


def interpret(formula: F, context: Sequence[tuple[str, str]], env: FormulaEnv,
              forall_mode: str = "guarded") -> TriposPredicate:
    """The predicate ``[x1:X1, ..., xn:Xn | formula]`` on the product of the Xi."""
    ctx = env.ctx
    names = [v for v, _ in context]
    if len(set(names)) != len(names):
        raise FormulaError("context variables must be distinct")
    for _, u in context:
        if u not in env.universes:
            raise FormulaError(f"unknown universe {u}")
    universe = _product([env.universes[u] for _, u in context])
    op = formula.op
    if op == "top":
        return top(ctx, universe)
    if op == "bot":
        return bot(ctx, universe)
    if op == "atom":
        pname, vs = formula.args
        if pname not in env.predicates:
            raise FormulaError(f"unknown predicate {pname}")
        sig, pred = env.predicates[pname]
        if len(sig) != len(vs):
            raise FormulaError(f"{pname} takes {len(sig)} arguments")
        idx = []
        for v, u in zip(vs, sig):
            if v not in names:
                raise FormulaError(f"unbound variable {v}")
            if context[names.index(v)][1] != u:
                raise FormulaError(f"variable {v} has the wrong universe for {pname}")
            idx.append(names.index(v))
        r = FiniteMap(universe, pred.universe, {t: tuple(t[i] for i in idx) for t in universe})
        return pred.reindex(r)
    if op == "not":
        return neg(interpret(formula.args[0], context, env, forall_mode))
    if op in _BINARY:
        a = interpret(formula.args[0], context, env, forall_mode)
        b = interpret(formula.args[1], context, env, forall_mode)
        return heyting(op, a, b)
    if op in ("forall", "exists"):
        var, uni, body = formula.args
        if var in names:
            raise FormulaError(f"variable {var} is already bound")
        inner = interpret(body, list(context) + [(var, uni)], env, forall_mode)
        proj = FiniteMap(inner.universe, universe, {t: t[:-1] for t in inner.universe})
        if op == "exists":
            return exists_along(proj, inner)
        return forall_along(proj, inner) if forall_mode == "guarded" else forall_prime(proj, inner)
    raise FormulaError(f"unknown operator {op}")


@dataclass(frozen=True)
class Validity:
    verdict: bool | None
    witness: object = None


def is_valid(formula: F, context: Sequence[tuple[str, str]], env: FormulaEnv,
             candidates: Sequence | None = None, bound: int = 32, forall_mode: str = "guarded") -> Validity:
    """Search for one realizer ``a`` of ``top <= [formula]``.

    Candidates are tried in order: the caller's list if given, otherwise the
    constant maps ``K c`` for sampled realizers ``c`` of the interpretation,
    followed by the probe pool and the first ``bound`` carrier elements in
    code order.  The first candidate that verifies is reported.
    """
    ctx = env.ctx
    pred = interpret(formula, context, env, forall_mode)
    tops = top(ctx, pred.universe)
    if candidates is None:
        cands = []
        for x in pred.universe:
            for c in pred(x).samples()[:4]:
                cands.append(ctx.value(ap(K, Const(c))))
        cands.extend(ctx.pool)
        cands.extend(enumerate_elements(ctx.model, bound))
        candidates = list(dict.fromkeys(cands))
    unknown = False
    for a in candidates:
        cert = check_entailment(tops, pred, a)
        if isinstance(cert, Verified):
            return Validity(True, a)
        if isinstance(cert, Inconclusive):
            unknown = True
    return Validity(None if unknown else False, None)


def enumerate_elements(model: PpcaModel, n: int) -> list:
    """The first ``n`` carrier elements in a fixed order."""
    if model.name == "oracle":
        return list(range(n))
    from .termmodel import NAp, TK, TS

    out = [TK, TS]
    frontier = [TK, TS]
    while len(out) < n:
        nxt = []
        for f in frontier:
            for x in (TK, TS):
                t = NAp(f, x)
                if model.is_element(t):
                    nxt.append(t)
        if not nxt:
            break
        out.extend(nxt)
        frontier = nxt
    return out[:n]
