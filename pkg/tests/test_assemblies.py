import random
from fractions import Fraction

import pytest

from helpers import term_model
from ppcakit import codec
from ppcakit.assemblies import (
    EmptyExistence,
    NotStable,
    NotStrict,
    check_decidable_order,
    check_map,
    check_strict,
    classify_stable,
    exponential_check,
    finite_assembly,
    functional_relation_check,
    int_neg,
    markov_certificate,
    nabla,
    nat_add,
    nat_succ,
    obj_n,
    obj_q,
    obj_z,
    product,
    rat_order_realizer,
    stable_predicate,
    std_assemblies,
    sub_assembly,
    topos_forall,
    topos_imp,
    topos_top,
    topos_valid,
)
from ppcakit.core import Counterexample, Verified
from ppcakit.terms import K, Const, ap, lam
from ppcakit.tripos import Everything, TriposContext, TriposPredicate


@pytest.fixture(scope="module")
def ctx():
    return TriposContext(term_model())


@pytest.fixture(scope="module")
def N(ctx):
    return obj_n(ctx, 25)


def test_identity_and_successor(ctx, N):
    assert isinstance(check_map(N, N, lambda n: n, ctx.kit["id"]), Verified)
    assert isinstance(check_map(N, N, lambda n: n + 1, nat_succ(ctx.kit)), Verified)
    bad = check_map(N, N, lambda n: n + 2, nat_succ(ctx.kit))
    assert isinstance(bad, Counterexample) and bad.point == 0


def test_image_outside_target(ctx, N):
    cex = check_map(N, N, lambda n: n - 1, ctx.kit["pred"])
    assert isinstance(cex, Counterexample) and cex.point == 0


def test_nabla_absorbs_every_map(ctx, N):
    target = nabla(ctx, ["a", "b", "c"])
    rng = random.Random(0)
    table = {n: rng.choice("abc") for n in N.points}
    assert isinstance(check_map(N, target, table.__getitem__, ctx.value(K)), Verified)
    assert isinstance(target.existence("a"), Everything)


def test_standard_existence_predicates(ctx):
    std = std_assemblies(ctx, 30)
    kit = ctx.kit
    assert std["Z"].existence(-3).elems == (kit.numeral(7),)
    assert std["Z"].existence(3).elems == (kit.numeral(6),)
    for n in range(30):
        q = codec.rat_decode(n)
        assert std["Q"].existence(q).elems == (kit.numeral(n),)
    assert std["N"].contains(10**6) and not std["N"].contains(-1)
    assert std["Z"].contains(-10**6)
    assert std["Q"].contains(Fraction(7, 3))


def test_integer_negation(ctx):
    Z = obj_z(ctx, 30)
    assert isinstance(check_map(Z, Z, lambda k: -k, int_neg(ctx.kit)), Verified)


def test_addition_on_pairs(ctx):
    small = obj_n(ctx, 6)
    NN = product(small, small)
    assert isinstance(check_map(NN, obj_n(ctx, 12), lambda xy: xy[0] + xy[1], nat_add(ctx.kit)), Verified)


def test_product_existence(ctx, N):
    kit = ctx.kit
    NN = product(N, N)
    pr = kit.call("*", "pair", kit.numeral(2), kit.numeral(5)).value
    assert NN.existence((2, 5)).contains(pr) is True
    assert NN.existence((5, 2)).contains(pr) is False
    fst = check_map(NN, N, lambda xy: xy[0], kit["fst"])
    assert isinstance(fst, Verified)


def test_constant_map_and_curry_round_trip(ctx):
    kit = ctx.kit
    small = obj_n(ctx, 5)
    c = kit.numeral(4)
    assert isinstance(exponential_check(small, small, lambda n: 4, ctx.value(ap(K, Const(c)))), Verified)
    # uncurried addition, then curried and uncurried back
    add = nat_add(kit)
    curried = ctx.value(lam("u v", ap(Const(add), ap(kit.const("pair"), "u", "v"))))
    uncurried = ctx.value(lam("w", ap(Const(curried), ap(kit.const("fst"), "w"), ap(kit.const("snd"), "w"))))
    target = obj_n(ctx, 10)
    assert isinstance(check_map(product(small, small), target, lambda xy: sum(xy), uncurried), Verified)
    for m in small.points:
        g = ctx.apply("*", curried, kit.numeral(m)).value
        assert isinstance(exponential_check(small, target, lambda n, m=m: m + n, g), Verified)


def test_empty_existence_rejected(ctx):
    with pytest.raises(EmptyExistence):
        finite_assembly(ctx, "X", {0: [ctx.kit.numeral(0)], 1: []})


def test_sub_assembly_of_evens(ctx, N):
    evens = TriposPredicate(N.points, lambda n: N.existence(n) if n % 2 == 0 else _empty(), ctx)
    sub = sub_assembly(N, evens)
    assert sub.points == tuple(n for n in N.points if n % 2 == 0)
    odd_realizer = TriposPredicate(N.points, lambda n: _finite([ctx.kit.numeral(n + 1)]), ctx)
    with pytest.raises(NotStrict):
        sub_assembly(N, odd_realizer)


def _empty():
    from ppcakit.tripos import Finite

    return Finite()


def _finite(xs):
    from ppcakit.tripos import Finite

    return Finite(xs)


def test_stable_classification(ctx, N):
    phi = TriposPredicate(N.points, lambda n: N.existence(n) if n == 3 else _empty(), ctx)
    indicator, cert = classify_stable(N, phi)
    assert indicator == {n: int(n == 3) for n in N.points}
    assert isinstance(cert, Verified)
    two = stable_predicate(phi)
    assert isinstance(two(3), Everything) and two(4).empty is True
    # a predicate whose realizer depends on data not present in E_X
    X = finite_assembly(ctx, "X", {0: [ctx.kit.numeral(0), ctx.kit.numeral(1)]})
    split = TriposPredicate((0,), lambda x: _finite([ctx.kit.numeral(0)]), ctx)
    classify_stable(X, split)  # K 0 works
    with pytest.raises(NotStable):
        classify_stable(X, split, witness=ctx.kit["id"])


def test_topos_connectives(ctx):
    kit = ctx.kit
    X = obj_n(ctx, 4)
    top = topos_top(X)
    for n in X.points:
        assert top(n).elems == X.existence(n).elems
    phi = TriposPredicate(X.points, lambda n: X.existence(n) if n < 2 else _empty(), ctx)
    assert isinstance(check_strict(X, phi), Verified)
    # (phi -> phi) holds at every point; a realizer is pair e (K id) for e in E_X
    impl = topos_imp(X, phi, phi)
    for n in X.points:
        a = kit.call("*", "pair", kit.numeral(n), kit["id"]).value
        assert impl(n).contains(a) is True
        wrong = kit.call("*", "pair", kit.numeral(n + 1), kit["id"]).value
        assert impl(n).contains(wrong) is False
    w = ctx.value(lam("x", ap(kit.const("pair"), "x", kit.const("id"))))
    assert isinstance(topos_valid(X, impl, w), Verified)
    # forall y: fst guards E_X(x), snd maps E_Y(y) into phi(x, y)
    Y = obj_n(ctx, 3)
    pairs = TriposPredicate([(x, y) for x in X.points for y in Y.points], lambda xy: Y.existence(xy[1]), ctx)
    fa = topos_forall(X, Y, pairs)
    good = kit.call("*", "pair", kit.numeral(1), kit["id"]).value
    assert fa(1).contains(good) is True
    assert fa(2).contains(good) is False


def test_functional_relation_of_certified_map(ctx):
    X = obj_n(ctx, 8)
    Y = obj_n(ctx, 9)
    cert = functional_relation_check(X, Y, lambda n: n + 1, nat_succ(ctx.kit))
    assert isinstance(cert, Verified)


def test_markov_certificate(ctx):
    rng = random.Random(2)
    seqs = []
    for _ in range(15):
        n = rng.randint(1, 12)
        bits = [rng.randint(0, 1) for _ in range(n - 1)] + [1]
        seqs.append(bits)
    assert isinstance(markov_certificate(ctx.kit, seqs), Verified)
    with pytest.raises(ValueError):
        markov_certificate(ctx.kit, [[0, 0]])


def test_decidable_rational_order():
    from helpers import kit_for, oracle_model
    from ppcakit import DEFAULT_ORACLES

    om = oracle_model(DEFAULT_ORACLES[:2])
    octx = TriposContext(om, fuel=10**7, kit=kit_for(om))
    Q = obj_q(octx, 12)
    r = rat_order_realizer(octx.kit)
    assert isinstance(check_decidable_order(Q, r), Verified)
