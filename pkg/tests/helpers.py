"""Shared generators and independent checkers for the test suite."""

from __future__ import annotations

import math
import random
from fractions import Fraction
from pathlib import Path

from ppcakit.core import Value, kleene_equal
from ppcakit.kit import Kit
from ppcakit.oraclemodel import DEFAULT_ORACLES, OracleModel
from ppcakit.termmodel import TermModel
from ppcakit.terms import K, S, App, Const, Var, eval_at

LAW_FUEL = 100_000

_TERM_MODEL = None
_ORACLE_MODEL = None
_KITS: dict = {}


def term_model() -> TermModel:
    global _TERM_MODEL
    if _TERM_MODEL is None:
        _TERM_MODEL = TermModel()
    return _TERM_MODEL


def oracle_model(params=DEFAULT_ORACLES) -> OracleModel:
    global _ORACLE_MODEL
    if params is DEFAULT_ORACLES:
        if _ORACLE_MODEL is None:
            _ORACLE_MODEL = OracleModel(params)
        return _ORACLE_MODEL
    return OracleModel(params)


def kit_for(model, fuel=LAW_FUEL) -> Kit:
    key = (id(model), fuel)
    if key not in _KITS:
        _KITS[key] = Kit(model, model.params, fuel)
    return _KITS[key]


# ---------------------------------------------------------------------------
# random carrier elements


def random_expr(rng: random.Random, depth: int, leaves, variables=()) -> object:
    """A random application tree of the given leaves and variable names."""
    if depth == 0 or rng.random() < 0.3:
        pick = rng.randrange(len(leaves) + len(variables))
        if pick < len(leaves):
            return leaves[pick]
        return Var(variables[pick - len(leaves)])
    return App(random_expr(rng, depth - 1, leaves, variables), random_expr(rng, depth - 1, leaves, variables))


def term_elements(rng: random.Random, n: int, depth: int = 4, fuel: int = 2_000) -> list:
    """``n`` normal forms reached by evaluating random S/K/atom trees."""
    tm = term_model()
    leaves = [K, S] + [Const(tm.from_text(a)) for a in ("a", "b", "c")]
    out = []
    while len(out) < n:
        o = eval_at(tm, "*", random_expr(rng, depth, leaves), fuel)
        if isinstance(o, Value):
            out.append(o.value)
    return out


def oracle_pool(model: OracleModel) -> list:
    kit = kit_for(model)
    named = [kit[n] for n in ("id", "pair", "fst", "snd", "true", "false", "succ", "pred", "iszero")]
    return list(range(64)) + named + [kit.numeral(i) for i in range(4)] + [model.K, model.S]


def oracle_elements(rng: random.Random, n: int, model: OracleModel) -> list:
    pool = oracle_pool(model)
    out = []
    for _ in range(n):
        if rng.random() < 0.2:
            out.append(rng.randrange(1 << 20))
        else:
            out.append(rng.choice(pool))
    return out


# ---------------------------------------------------------------------------
# the five ppca laws, checked directly through model.apply


def _app(model, p, a, b, fuel):
    return model.apply(p, a, b, fuel)


def _app_out(model, p, fo, xo, fuel):
    """Application of two outcomes, strict in both."""
    for o in (fo, xo):
        if not isinstance(o, Value):
            return o
    return model.apply(p, fo.value, xo.value, fuel)


def ppca_law_failures(model, a, b, c, fuel=LAW_FUEL) -> list[str]:
    """Names of the laws that fail on ``(a, b, c)``; undecided cases do not count."""
    failures = []
    params = model.params
    ka = [_app(model, p, model.K, a, fuel) for p in params]
    sa = [_app(model, p, model.S, a, fuel) for p in params]
    if not all(isinstance(o, Value) for o in ka) or len({o.value for o in ka}) != 1:
        failures.append("K a uniform")
    if not all(isinstance(o, Value) for o in sa) or len({o.value for o in sa}) != 1:
        failures.append("S a uniform")
    sab = []
    for p, ko, so in zip(params, ka, sa):
        if isinstance(ko, Value):
            kab = _app(model, p, ko.value, b, fuel)
            if not (isinstance(kab, Value) and kab.value == a):
                failures.append("K a b = a")
        if isinstance(so, Value):
            sab.append(_app(model, p, so.value, b, fuel))
    if len(sab) == len(params):
        if not all(isinstance(o, Value) for o in sab) or len({o.value for o in sab}) != 1:
            failures.append("S a b uniform")
        for p, so in zip(params, sab):
            if not isinstance(so, Value):
                continue
            lhs = _app(model, p, so.value, c, fuel)
            rhs = _app_out(model, p, _app(model, p, a, c, fuel), _app(model, p, b, c, fuel), fuel)
            if kleene_equal(lhs, rhs) is False:
                failures.append("S a b c ~ (a c)(b c)")
    return sorted(set(failures))


# ---------------------------------------------------------------------------
# rationals


def random_rational(rng: random.Random, lo=-3, hi=3, max_den=40) -> Fraction:
    den = rng.randint(1, max_den)
    return Fraction(rng.randint(lo * den, hi * den), den)


def unit_rational(rng: random.Random, max_den=40) -> Fraction:
    den = rng.randint(1, max_den)
    return Fraction(rng.randint(0, den), den)


def binary_approx(q: Fraction, k: int) -> Fraction:
    s = 1 << (k + 1)
    return Fraction(math.floor(q * s), s)


def perturbed_approx(q: Fraction, k: int, rng: random.Random) -> Fraction:
    """A rational strictly within ``2^-k`` of ``q``, off by a random amount."""
    num = rng.randint(-999, 999)
    return q + Fraction(num, 1000 * (1 << k))


# ---------------------------------------------------------------------------
# brute-force uncovered point: the lcm grid


def lcm_grid_uncovered(closed, window) -> Fraction | None:
    """Leftmost uncovered component's midpoint, found on a common-denominator grid.

    Every endpoint is a multiple of ``1/L``; between consecutive grid points
    membership is constant, so the odd multiples of ``1/(2L)`` sample every
    elementary open cell.  The midpoint of the leftmost maximal run of
    uncovered cells is the midpoint of the leftmost uncovered component.
    """
    ends = [window.lo, window.hi] + [e for iv in closed for e in (iv.lo, iv.hi)]
    L = 1
    for e in ends:
        L = L * e.denominator // math.gcd(L, e.denominator)
    lo, hi = int(window.lo * L), int(window.hi * L)

    def covered(x):
        return any(iv.lo <= x <= iv.hi for iv in closed)

    start = None
    for cell in range(lo, hi):
        mid = Fraction(2 * cell + 1, 2 * L)
        if not covered(mid):
            # a run continues across a grid point only if that point is uncovered
            if start is None:
                start = Fraction(cell, L)
            end = Fraction(cell + 1, L)
            if cell + 1 < hi and covered(end):
                return (start + end) / 2
        elif start is not None:
            return (start + Fraction(cell, L)) / 2
    if start is not None:
        return (start + Fraction(hi, L)) / 2
    return None


def numeral_index(kit: Kit, value, limit=200):
    return kit.numeral_index(value, limit)



# ---------------------------------------------------------------------------
# random machine programs

_UNARY = ("succ", "pred", "iszero", "fst", "snd")
_BINARY = ("pair", "add", "sub", "mul", "div", "mod", "lt", "eq")


def random_program(rng: random.Random, depth: int, oracle: bool = False):
    """A random total-ish arithmetic program on the input."""
    from ppcakit import machine as M

    if depth == 0 or rng.random() < 0.25:
        r = rng.random()
        if oracle and r < 0.2:
            return M.oracle(M.lit(rng.randrange(8)))
        return M.INPUT if r < 0.6 else M.lit(rng.randrange(50))
    if rng.random() < 0.4:
        return getattr(M, rng.choice(_UNARY))(random_program(rng, depth - 1, oracle))
    if rng.random() < 0.1:
        return M.if_(*(random_program(rng, depth - 1, oracle) for _ in range(3)))
    return getattr(M, rng.choice(_BINARY))(random_program(rng, depth - 1, oracle), random_program(rng, depth - 1, oracle))


# ---------------------------------------------------------------------------
# randomized tripos instances


def tripos_context(n_params: int = 3):
    from ppcakit.tripos import TriposContext

    om = oracle_model(DEFAULT_ORACLES[:n_params])
    return TriposContext(om, fuel=LAW_FUEL, kit=kit_for(om))


def _base_elements(ctx) -> list:
    kit = ctx.kit
    return [kit.numeral(i) for i in range(3)] + [kit["true"], kit["false"], kit["pair"]] + list(range(3, 9))


def _total_maps(ctx, base) -> list:
    """Realizers that are total and parameter-independent on every element."""
    from ppcakit.terms import K, Const, ap

    kit = ctx.kit
    out = [kit["id"]]
    out += [ctx.value(ap(K, Const(c))) for c in base[:4]]
    out += [ctx.value(ap(kit.const("pair"), Const(c))) for c in base[:3]]
    return out


def _image(ctx, f, elems) -> list:
    return [ctx.apply(ctx.params[0], f, a).value for a in elems]


def _rand_pred(rng, ctx, universe, base, size=2, fill=None):
    from ppcakit.tripos import TriposPredicate

    table = {}
    for x in universe:
        items = list(fill(x)) if fill else []
        items += rng.sample(base, rng.randint(0, size))
        table[x] = list(dict.fromkeys(items))[:4]
    return TriposPredicate.finite(ctx, table)


def tripos_instance_failures(rng: random.Random, ctx) -> list[str]:
    """Check the connective and quantifier rules on one random instance.

    Predicates are built so that chosen maps realize the premises; every
    synthesized realizer must then verify.  Failures are returned as names.
    """
    from ppcakit.core import Counterexample, Verified
    from ppcakit.terms import Const, ap, lam
    from ppcakit.tripos import (
        FiniteMap,
        NonSurjective,
        NotAPullback,
        Square,
        Synth,
        beck_chevalley,
        check_entailment,
        compare_foralls,
        conj,
        disj,
        exists_along,
        forall_along,
        imp,
    )

    fails = []
    syn = Synth(ctx)
    base = _base_elements(ctx)
    maps = _total_maps(ctx, base)

    def need(label, cert):
        if not isinstance(cert, Verified):
            fails.append(f"{label}: {cert}")

    X = list(range(rng.randint(1, 6)))
    f1, f2, g = (rng.choice(maps) for _ in range(3))
    phi = _rand_pred(rng, ctx, X, base)
    theta = _rand_pred(rng, ctx, X, base)
    psi = _rand_pred(rng, ctx, X, base, fill=lambda x: _image(ctx, f1, phi(x).elems))
    chi = _rand_pred(rng, ctx, X, base, fill=lambda x: _image(ctx, f2, phi(x).elems))
    need("premise phi<=psi", check_entailment(phi, psi, f1))
    need("premise phi<=chi", check_entailment(phi, chi, f2))

    # conjunction: both directions
    c = syn.conj_intro(f1, f2)
    need("and-intro", check_entailment(phi, conj(psi, chi), c))
    need("and-left", check_entailment(phi, psi, syn.conj_left(c)))
    need("and-right", check_entailment(phi, chi, syn.conj_right(c)))

    # disjunction: both directions
    chi2 = _rand_pred(
        rng, ctx, X, base, size=0,
        fill=lambda x: _image(ctx, f2, phi(x).elems) + _image(ctx, g, theta(x).elems),
    )
    d = syn.disj_elim(f2, g)
    need("or-elim", check_entailment(disj(phi, theta), chi2, d))
    need("or-left", check_entailment(phi, chi2, syn.disj_left(d)))
    need("or-right", check_entailment(theta, chi2, syn.disj_right(d)))

    # implication: currying and uncurrying
    b = ctx.value(lam("z", ap(Const(f2), ap(ctx.kit.const("fst"), "z"))))
    need("and-imp premise", check_entailment(conj(phi, psi), chi, b))
    cb = syn.curry(b)
    need("curry", check_entailment(phi, imp(psi, chi), cb))
    need("uncurry", check_entailment(conj(phi, psi), chi, syn.uncurry(cb)))

    # quantifiers along a random r : Y -> X
    Y = list(range(rng.randint(1, 6)))
    r = FiniteMap(Y, X, {y: rng.choice(X) for y in Y})
    f = rng.choice(maps)
    phiY = _rand_pred(rng, ctx, Y, base)

    def fiber_image(x):
        return list(dict.fromkeys(e for y in r.fiber(x) for e in _image(ctx, f, phiY(y).elems)))

    psiX = _rand_pred(rng, ctx, X, base, fill=fiber_image)
    # predicates hold at most four realizers, so large images get truncated
    if all(len(fiber_image(x)) <= 4 for x in X):
        need("exists left", check_entailment(exists_along(r, phiY), psiX, f))
        need("exists right", check_entailment(phiY, psiX.reindex(r), f))
    w = rng.choice(maps + base)
    a1 = isinstance(check_entailment(exists_along(r, phiY), psiX, w), Verified)
    a2 = isinstance(check_entailment(phiY, psiX.reindex(r), w), Verified)
    if a1 != a2:
        fails.append("exists adjunction disagrees on a random witness")

    psi2 = _rand_pred(rng, ctx, X, base)
    phi2 = _rand_pred(rng, ctx, Y, base, fill=lambda y: _image(ctx, f, psi2(r(y)).elems))
    need("forall premise", check_entailment(psi2.reindex(r), phi2, f))
    u = syn.forall_unit(f)
    need("forall unit", check_entailment(psi2, forall_along(r, phi2), u))
    need("forall counit", check_entailment(psi2.reindex(r), phi2, syn.forall_counit(u)))

    # the two universal quantifiers
    if r.surjective:
        cmp = compare_foralls(r, phi2)
        need("forall' <= forall", cmp.simple_below_guarded)
        need("forall <= forall'", cmp.guarded_below_simple)
    else:
        try:
            compare_foralls(r, phi2)
            fails.append("non-surjective comparison accepted")
        except NonSurjective:
            pass
        cmp = compare_foralls(r, phi2, require_surjective=False)
        if not isinstance(cmp.guarded_below_simple, Counterexample):
            fails.append("non-surjective forall <= forall' was not refuted")

    # Beck-Chevalley on a random pullback square
    W = list(range(rng.randint(1, 3)))
    # at most six points in the pullback
    Xs = list(range(rng.randint(1, 3)))
    Zs = list(range(rng.randint(1, 2)))
    v = FiniteMap(Xs, W, {x: rng.choice(W) for x in Xs})
    q = FiniteMap(Zs, W, {z: rng.choice(W) for z in Zs})
    P = [(x, z) for x in Xs for z in Zs if v(x) == q(z)]
    sq = Square(FiniteMap(P, Xs, {p: p[0] for p in P}), FiniteMap(P, Zs, {p: p[1] for p in P}), v, q)
    phiZ = _rand_pred(rng, ctx, Zs, base, size=4)
    need("Beck-Chevalley", beck_chevalley(sq, phiZ))
    if P:
        P2 = P[:-1]
        bad = Square(FiniteMap(P2, Xs, {p: p[0] for p in P2}), FiniteMap(P2, Zs, {p: p[1] for p in P2}), v, q)
        try:
            bad.check_pullback()
            fails.append("non-pullback square accepted")
        except NotAPullback:
            pass
    return fails


# ---------------------------------------------------------------------------
# cover families


def _chain_cover(rng: random.Random):
    """Overlapping open intervals spanning [-1/10, 11/10], shuffled."""
    from ppcakit.cover import op

    cuts = sorted({Fraction(rng.randint(5, 95), 100) for _ in range(rng.randint(2, 5))})
    out, lo = [], Fraction(-1, 10)
    for c in cuts:
        out.append(op(lo, c + Fraction(1, 40)))
        lo = c - Fraction(1, 40)
    out.append(op(lo, Fraction(11, 10)))
    rng.shuffle(out)
    return out


def subcover_family(seed: int = 0, size: int = 20):
    """``size`` covers, half covering [0, 1] and half leaving a gap."""
    from ppcakit.cover import finite_subcover, op

    rng = random.Random(seed)
    covering, gapped = [], []
    while len(covering) < size // 2 or len(gapped) < size - size // 2:
        cover = _chain_cover(rng)
        if len(covering) < size // 2:
            covering.append(cover)
            continue
        i = rng.randrange(len(cover))
        iv = cover[i]
        cover[i] = op(iv.lo, iv.lo + iv.length / 4)
        if not finite_subcover(cover).ok:
            gapped.append(cover)
    return [(c, True) for c in covering] + [(c, False) for c in gapped]


def random_open_cover(rng: random.Random, n: int):
    from ppcakit.cover import op

    out = []
    for _ in range(n):
        dens = (rng.randint(1, 30), rng.randint(1, 30))
        a, b = sorted(Fraction(rng.randint(-d, 2 * d), d) for d in dens)
        if a == b:
            b += Fraction(1, 7)
        out.append(op(a, b))
    return out


# ---------------------------------------------------------------------------
# CLI invocations: (argv, exit code, exact stdout or None), run from tests/data

DATA = Path(__file__).parent / "data"

CLI_CASES = [
    (["eval", "(((S K) K) `a`)"], 0, "a\n"),
    (["eval", "--model", "oracle", "--params", "2", "kit:numeral:2"], 0, None),
    (["compile", "(lam x (x x))"], 0, "((S ((S K) K)) ((S K) K))\n"),
    (["compile", "--value", "(lam x x)"], 0, "((S K) K)\n((S K) K)\n"),
    (["uniform", "((S K) K)"], 0, "uniform ((S K) K)\n"),
    (["uniform", "--model", "oracle", "((S K) K)"], 0, None),
    (["kit", "numeral:1"], 0, None),
    (["kit"], 0, None),
    (["entail", "--pred", "phi.pred", "--pred", "psi.pred", "--witness", "((S K) K)"], 0,
     "verified ((S K) K)\n"),
    (["entail", "--pred", "psi.pred", "--pred", "phi.pred", "--witness", "((S K) K)"], 1,
     "counterexample point=x0 realizer=S param=*\n"),
    (["formula", "(forall x U (imp (P x) (P x)))", "--universe", "U=a,b", "--pred", "P:U=row.pred"], 0,
     "valid (K (K ((S K) K)))\n"),
    (["assembly", "--from", "N", "--to", "N", "--fn", "succ", "--witness", "kit:succ", "--range", "20"], 0, None),
    (["assembly", "--from", "N", "--to", "N", "--fn", "id", "--witness", "kit:succ", "--range", "20"], 1, None),
    (["real-check", "--model", "oracle", "--realizer", "binary:1/3", "--target", "1/3", "--depth", "12"], 0,
     "verified depth=12\n"),
    (["real-check", "--model", "oracle", "--realizer", "shifted:1/3", "--target", "1/3"], 1, None),
    (["compare", "--model", "oracle", "--left", "const:1/3", "--right", "binary:1/2"], 0, "less 19/48 k=4\n"),
    (["compare", "--model", "oracle", "--left", "rule:1/3", "--right", "rule:1/3", "--fuel", "2000"], 2, None),
    (["diag", "cantor", "--seq", "0,1/8,1/5", "--steps", "3"], 0,
     "0 0/1 1/4\n1 1/5 1/4\n2 6/25 1/4\n3 31/125 1/4\n"),
    (["diag", "cantor", "--steps", "5", "--seed", "7"], 0, None),
    (["diag", "cauchy", "--steps", "3", "--seed", "4"], 0, None),
    (["interval", "I", "--model", "oracle", "--realizer", "const:1/2", "--depth", "6"], 0, None),
    (["interval", "J", "--model", "oracle", "--realizer", "w", "--depth", "6"], 0, None),
    (["cover", "point", "point.txt"], 0, "1/10\n"),
    (["cover", "singular", "--eps", "1/2", "--points", "0,1/2,1", "--n", "3"], 0,
     "open -1/8 1/8\nopen 7/16 9/16\nopen 31/32 33/32\n"),
    (["cover", "normalize", "covers.txt", "--stages", "4"], 0, None),
    (["cover", "subcover", "covers.txt", "--n", "2"], 0, "covered 0 1\n"),
    (["cover", "subcover", "covers.txt", "--n", "1"], 1, "gap 3/4\n"),
    (["cover", "tent", "covers.txt", "--x", "0", "--n", "2"], 0, "2/3\n"),
]
