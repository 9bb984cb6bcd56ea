"""Parameterized assemblies over finite or sampled carriers.

An assembly pairs a carrier with an existence predicate whose realizer sets
are all inhabited.  Infinite carriers (N, Z, Q) are handled by a membership
rule plus a finite sample of points used by every universal check.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Hashable, Iterable, Sequence

from . import codec
from . import machine as M
from .core import DEFAULT_FUEL, Counterexample, FuelExhausted, Inconclusive, Value, Verified, all3
from .kit import Kit, markov_search
from .terms import K, Const, ap, lam
from .tripos import (
    Everything,
    Finite,
    Intensional,
    RealizerSet,
    TriposContext,
    TriposPredicate,
    check_entailment,
    outcome_in,
)

DEFAULT_RANGE = 200


class NotStrict(ValueError):
    pass


class NotStable(ValueError):
    pass


class EmptyExistence(ValueError):
    pass


class Assembly:
    """A carrier with an existence predicate.

    ``points`` is the full carrier when finite and a sample otherwise;
    ``member`` decides carrier membership for points outside the sample.
    """

    def __init__(self, ctx: TriposContext, name: str, existence: Callable[[Hashable], RealizerSet],
                 points: Sequence, member: Callable[[Hashable], bool] | None = None, finite: bool = True):
        self.ctx = ctx
        self.name = name
        self._existence = existence
        self._cache: dict = {}
        self.points = tuple(points)
        self.finite = finite
        self._member = member

    def existence(self, x) -> RealizerSet:
        if x not in self._cache:
            if not self.contains(x):
                raise KeyError(f"{x!r} is not in the carrier of {self.name}")
            self._cache[x] = self._existence(x)
        return self._cache[x]

    def contains(self, x) -> bool:
        if self._member is not None:
            return self._member(x)
        return x in self.points

    def check_inhabited(self) -> None:
        for x in self.points:
            if self.existence(x).empty is True:
                raise EmptyExistence(f"{self.name}: no realizer for {x!r}")

    def as_predicate(self) -> TriposPredicate:
        return TriposPredicate(self.points, self.existence, self.ctx, f"E_{self.name}")

    def __repr__(self):
        kind = "finite" if self.finite else "sampled"
        return f"Assembly({self.name}, {kind}, {len(self.points)} points)"


def finite_assembly(ctx: TriposContext, name: str, table: dict) -> Assembly:
    for x, elems in table.items():
        if not elems:
            raise EmptyExistence(f"{name}: no realizer for {x!r}")
    sets = {x: Finite(v) for x, v in table.items()}
    return Assembly(ctx, name, sets.__getitem__, list(table))


# ---------------------------------------------------------------------------
# numbers


def _is_nat(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool) and x >= 0


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def obj_n(ctx: TriposContext, sample: int = DEFAULT_RANGE) -> Assembly:
    kit = ctx.kit
    return Assembly(ctx, "N", lambda n: Finite([kit.numeral(n)]), range(sample), _is_nat, finite=False)


def obj_z(ctx: TriposContext, sample: int = DEFAULT_RANGE) -> Assembly:
    kit = ctx.kit
    half = sample // 2
    points = sorted(range(-half, half + 1), key=codec.int_encode)
    return Assembly(ctx, "Z", lambda k: Finite([kit.numeral(codec.int_encode(k))]), points, _is_int, finite=False)


def obj_q(ctx: TriposContext, sample: int = DEFAULT_RANGE) -> Assembly:
    kit = ctx.kit
    points = [codec.rat_decode(n) for n in range(sample)]
    return Assembly(
        ctx,
        "Q",
        lambda q: Finite([kit.numeral(codec.rat_encode(q))]),
        points,
        lambda q: isinstance(q, (int, Fraction)),
        finite=False,
    )


def std_assemblies(ctx: TriposContext, sample: int = DEFAULT_RANGE) -> dict[str, Assembly]:
    return {"N": obj_n(ctx, sample), "Z": obj_z(ctx, sample), "Q": obj_q(ctx, sample)}


def nabla(ctx: TriposContext, points: Iterable, name: str = "nabla") -> Assembly:
    """The constant assembly: every realizer realizes every point."""
    everything = Everything(ctx.pool)
    return Assembly(ctx, name, lambda x: everything, list(points))


# ---------------------------------------------------------------------------
# maps


def check_map(X: Assembly, Y: Assembly, f: Callable, a) -> Verified | Counterexample | Inconclusive:
    """Does ``a`` realize ``f : X -> Y``?  Checked over X's points and realizer samples."""
    ctx = X.ctx
    unknown = None
    for x in X.points:
        y = f(x)
        if not Y.contains(y):
            return Counterexample(x, None, None, f"image {y!r} is outside {Y.name}")
        target = Y.existence(y)
        for b in X.existence(x).samples():
            for p in ctx.params:
                v = outcome_in(ctx.apply(p, a, b), target)
                if v is False:
                    return Counterexample(x, b, p)
                if v is None and unknown is None:
                    unknown = x
    if unknown is not None:
        return Inconclusive(f"fuel exhausted at {unknown!r}")
    return Verified(a)


def exponential_check(X: Assembly, Y: Assembly, f: Callable, a):
    """Whether ``a`` belongs to the existence predicate of ``Y^X`` at ``f``."""
    return check_map(X, Y, f, a)


def product(X: Assembly, Y: Assembly) -> Assembly:
    ctx = X.ctx
    kit = ctx.kit

    def existence(xy):
        x, y = xy
        A, B = X.existence(x), Y.existence(y)

        def test(a):
            return all3(
                v
                for p in ctx.params
                for v in (
                    outcome_in(ctx.apply_chain(p, kit["fst"], a), A),
                    outcome_in(ctx.apply_chain(p, kit["snd"], a), B),
                )
            )

        known = []
        for b in A.samples()[:2]:
            for c in B.samples()[:2]:
                o = ctx.apply_chain(ctx.params[0], kit["pair"], b, c)
                if isinstance(o, Value):
                    known.append(o.value)
        return Intensional(test, known, ctx.pool, False)

    points = [(x, y) for x in X.points for y in Y.points]
    return Assembly(
        ctx,
        f"{X.name}x{Y.name}",
        existence,
        points,
        lambda xy: isinstance(xy, tuple) and len(xy) == 2 and X.contains(xy[0]) and Y.contains(xy[1]),
        finite=X.finite and Y.finite,
    )


def classify_stable(X: Assembly, phi: TriposPredicate, witness=None):
    """The two-valued map of a stable predicate, with its stability certificate.

    ``phi`` is stable when one realizer ``a`` sends every ``b`` in ``E_X(x)``
    into ``phi(x)`` wherever ``phi(x)`` is inhabited.  Candidates tried when no
    witness is given: the identity, then ``K c`` for sampled realizers ``c``.
    """
    ctx = X.ctx
    indicator = {}
    for x in phi.universe:
        e = phi(x).empty
        if e is None:
            raise NotStable(f"cannot decide whether the predicate holds at {x!r}")
        indicator[x] = 0 if e else 1
    inhabited = [x for x in phi.universe if indicator[x]]
    cands = [witness] if witness is not None else _stability_candidates(ctx, phi, inhabited)
    sub = TriposPredicate(inhabited, X.existence, ctx)
    target = TriposPredicate(inhabited, phi, ctx)
    last = None
    for a in cands:
        cert = check_entailment(sub, target, a)
        if isinstance(cert, Verified):
            return indicator, cert
        last = cert
    raise NotStable(f"no stability realizer found: {last}")


def _stability_candidates(ctx, phi, inhabited):
    out = [ctx.kit["id"]]
    for x in inhabited[:1]:
        for c in phi(x).samples()[:4]:
            out.append(ctx.value(ap(K, Const(c))))
    return out


def stable_predicate(phi: TriposPredicate) -> TriposPredicate:
    """The predicate sending inhabited points to everything and the rest to nothing."""
    ctx = phi.ctx
    return TriposPredicate(
        phi.universe, lambda x: Finite() if phi(x).empty else Everything(ctx.pool), ctx
    )


def check_strict(X: Assembly, phi: TriposPredicate, witness=None):
    """Certify ``phi <= E_X`` (by the identity unless a witness is given)."""
    a = witness if witness is not None else X.ctx.kit["id"]
    return check_entailment(phi, TriposPredicate(phi.universe, X.existence, X.ctx), a)


def sub_assembly(X: Assembly, phi: TriposPredicate, witness=None, name: str | None = None) -> Assembly:
    cert = check_strict(X, phi, witness)
    if not isinstance(cert, Verified):
        raise NotStrict(f"predicate is not strict on {X.name}: {cert}")
    points = [x for x in phi.universe if phi(x).empty is False]
    return Assembly(X.ctx, name or f"sub({X.name})", phi, points)


# ---------------------------------------------------------------------------
# topos connectives on strict predicates


def topos_top(X: Assembly) -> TriposPredicate:
    return X.as_predicate()


def topos_imp(X: Assembly, phi: TriposPredicate, psi: TriposPredicate) -> TriposPredicate:
    ctx = X.ctx
    kit = ctx.kit

    def make(x):
        E, A, B = X.existence(x), phi(x), psi(x)

        def test(a):
            out = []
            for p in ctx.params:
                out.append(outcome_in(ctx.apply_chain(p, kit["fst"], a), E))
                snd = ctx.apply_chain(p, kit["snd"], a)
                if not isinstance(snd, Value):
                    out.append(None if isinstance(snd, FuelExhausted) else False)
                    continue
                out.extend(
                    outcome_in(ctx.apply(q, snd.value, b), B) for b in A.samples() for q in ctx.params
                )
            return all3(out)

        return Intensional(test, (), ctx.pool, None)

    return TriposPredicate(phi.universe, make, ctx)


def topos_forall(X: Assembly, Y: Assembly, phi: TriposPredicate) -> TriposPredicate:
    """``forall y in Y. phi(x, y)`` for ``phi`` on pairs ``(x, y)``."""
    ctx = X.ctx
    kit = ctx.kit

    def make(x):
        E = X.existence(x)

        def test(a):
            out = []
            for p in ctx.params:
                out.append(outcome_in(ctx.apply_chain(p, kit["fst"], a), E))
                snd = ctx.apply_chain(p, kit["snd"], a)
                if not isinstance(snd, Value):
                    out.append(None if isinstance(snd, FuelExhausted) else False)
                    continue
                for y in Y.points:
                    for b in Y.existence(y).samples():
                        out.append(outcome_in(ctx.apply(p, snd.value, b), phi((x, y))))
            return all3(out)

        return Intensional(test, (), ctx.pool, None)

    return TriposPredicate(X.points, make, ctx)


def topos_valid(X: Assembly, phi: TriposPredicate, witness):
    """Topos validity: ``witness`` maps existence realizers into ``phi``."""
    return check_entailment(X.as_predicate(), phi, witness)


# ---------------------------------------------------------------------------
# functional relations induced by maps


def functional_relation_check(X: Assembly, Y: Assembly, f: Callable, a):
    """Strictness, single-valuedness and totality of the relation induced by ``f``.

    ``F(x, y)`` holds the realizers ``b`` with ``fst b`` in ``E_X(x)`` and
    ``snd b`` in ``E_Y(y)`` when ``f(x) = y`` and is empty otherwise.  Totality
    is witnessed by ``x -> pair x (a x)``.
    """
    ctx = X.ctx
    kit = ctx.kit
    XY = product(X, Y)

    def rel(xy):
        x, y = xy
        return XY.existence(xy) if f(x) == y else Finite()

    for x in X.points:
        hits = [y for y in Y.points if rel((x, y)).empty is not True]
        if any(y != f(x) for y in hits):
            return Counterexample(x, None, None, "relation is not single-valued")
    total = ctx.value(lam("x", ap(kit.const("pair"), "x", ap(Const(a), "x"))))
    graph = TriposPredicate(X.points, lambda x: rel((x, f(x))), ctx)
    cert = check_entailment(X.as_predicate(), graph, total)
    if not isinstance(cert, Verified):
        return cert
    # strictness is immediate from the shape of F; check it on the known members
    for x in X.points:
        for b in rel((x, f(x))).samples():
            if XY.existence((x, f(x))).contains(b) is not True:
                return Counterexample(x, b, None, "relation is not strict")
    return Verified(total)


# ---------------------------------------------------------------------------
# arithmetic and order realizers


def nat_succ(kit: Kit):
    return kit["succ"]


def nat_add(kit: Kit):
    """Uncurried addition on numerals, reading a pair."""
    add = ap(kit.const("primrec"), "m", lam("k r", ap(kit.const("succ"), "r")), "n")
    curried = lam("m n", add)
    return kit.value_of(lam("u", ap(curried, ap(kit.const("fst"), "u"), ap(kit.const("snd"), "u"))))


def int_neg(kit: Kit):
    """Negation on the integer coding: 0 stays, even indices go up, odd go down."""
    not_ = lam("b", ap(kit.const("if"), "b", kit.const("false"), kit.const("true")))
    even = lam("n", ap(kit.const("primrec"), kit.const("true"), lam("k r", ap(not_, "r")), "n"))
    body = ap(
        kit.const("if"),
        ap(kit.const("iszero"), "n"),
        ap(K, kit.const("zero")),
        ap(
            kit.const("if"),
            ap(even, "n"),
            lam("d", ap(kit.const("succ"), "n")),
            lam("d", ap(kit.const("pred"), "n")),
        ),
        kit.const("id"),
    )
    return kit.value_of(lam("n", body))


def rat_order_realizer(kit: Kit, conv=None):
    """Realizer of ``forall x y in Q. x < y or y <= x`` in the oracle model.

    Applied to the numerals of ``x`` and ``y`` it returns ``pair true K`` when
    ``x < y`` and ``pair false K`` otherwise.
    """
    from .kit import OracleConversions

    conv = conv or OracleConversions(kit)
    yes = kit.value_of(ap(kit.const("pair"), kit.const("true"), K))
    no = kit.value_of(ap(kit.const("pair"), kit.const("false"), K))
    num = M.lit(conv.num)
    body = M.if_(
        M.qlt(M.apply_(num, M.H0), M.apply_(num, M.INPUT)),
        M.lit(yes),
        M.lit(no),
    )
    return M.encode(M.tmpl(body, M.INPUT))


def check_decidable_order(Q: Assembly, realizer, points: Sequence | None = None):
    """The tag of ``realizer bx by`` must be ``true`` exactly when ``x < y``."""
    ctx = Q.ctx
    kit = ctx.kit
    pts = Q.points if points is None else points
    for x in pts:
        for y in pts:
            for bx in Q.existence(x).samples():
                for by in Q.existence(y).samples():
                    for p in ctx.params:
                        o = ctx.apply_chain(p, realizer, bx, by)
                        if isinstance(o, FuelExhausted):
                            return Inconclusive(f"fuel exhausted at {(x, y)!r}")
                        if not isinstance(o, Value):
                            return Counterexample((x, y), bx, p, "undefined")
                        tag = ctx.apply_chain(p, kit["fst"], o.value)
                        want = kit.boolean(x < y)
                        if not (isinstance(tag, Value) and tag.value == want):
                            return Counterexample((x, y), bx, p, "wrong disjunct")
    return Verified(realizer)


# ---------------------------------------------------------------------------
# Markov's principle


def markov_certificate(kit: Kit, sequences: Iterable[Sequence[int]], params=None,
                       fuel: int = DEFAULT_FUEL):
    """Run the search realizer on characteristic maps of bit sequences.

    Every sequence must contain a 1; the search must return the numeral of the
    first one.
    """
    params = kit.params if params is None else params
    for bits in sequences:
        bits = list(bits)
        if 1 not in bits:
            raise ValueError("each probed sequence needs a 1")
        want = kit.numeral(bits.index(1))
        f = kit.characteristic(bits)
        for p in params:
            o = markov_search(kit, p, f, fuel)
            if isinstance(o, FuelExhausted):
                return Inconclusive(f"fuel exhausted on {bits}")
            if not (isinstance(o, Value) and o.value == want):
                return Counterexample(tuple(bits), f, p, "search missed the least witness")
    return Verified(kit["search"])
