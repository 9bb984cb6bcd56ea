import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import lcm_grid_uncovered, random_open_cover, subcover_family, unit_rational
from ppcakit.cover import (
    Covered,
    Gap,
    PreconditionViolated,
    cd_interval,
    cd_range,
    cl,
    finite_subcover,
    format_cover,
    normalize_phases,
    normalize_well_behaved,
    op,
    parse_cover,
    singular_cover,
    tent,
    tent_sum,
    uncovered_phases,
    uncovered_point,
    well_behaved_report,
)

Q = Fraction


# -- uncovered point ------------------------------------------------------------


def test_uncovered_point_examples():
    assert uncovered_point([], op(0, 1)) == Q(1, 2)
    assert uncovered_point([cl(Q(1, 5), Q(1, 2))], op(0, 1)) == Q(1, 10)
    with pytest.raises(PreconditionViolated):
        uncovered_point([cl(0, Q(1, 2)), cl(Q(1, 2), 1)], op(0, 1))


# small denominators keep the brute-force grid short
DENS = (1, 2, 3, 4, 5, 6, 8, 9, 10, 12)


def _closed_instance(rng):
    window = op(Q(rng.randint(-5, 0), 4), Q(rng.randint(4, 9), 4))
    budget = window.length
    closed = []
    for _ in range(rng.randint(0, 8)):
        c = Q(rng.randint(-12, 40), rng.choice(DENS))
        w = Q(rng.randint(0, 12), rng.choice(DENS) * 4)
        if w >= budget:
            continue
        budget -= w
        closed.append(cl(c, c + w))
    return closed, window


def test_uncovered_point_matches_the_grid_oracle():
    rng = random.Random(0)
    for _ in range(500):
        closed, window = _closed_instance(rng)
        x = uncovered_point(closed, window)
        assert x in window and not any(x in iv for iv in closed)
        assert x == lcm_grid_uncovered(closed, window)


def test_surviving_length_bookkeeping():
    rng = random.Random(1)
    for _ in range(100):
        closed, window = _closed_instance(rng)
        removed = Q(0)
        for k, pieces in enumerate(uncovered_phases(closed, window)):
            if k:
                removed += closed[k - 1].length
            assert sum((p.length for p in pieces), Q(0)) >= window.length - removed
            assert all(a.hi <= b.lo for a, b in zip(pieces, pieces[1:]))


# -- singular covers ------------------------------------------------------------


@given(st.lists(st.builds(Fraction, st.integers(0, 64), st.just(64)), min_size=1, max_size=30),
       st.sampled_from([Q(1, 2), Q(1, 3), Q(9, 10)]))
def test_singular_cover_prefixes(points, eps):
    cover = singular_cover(points, eps)
    for i, (mu, iv) in enumerate(zip(points, cover)):
        assert mu in iv
    n = len(cover)
    assert sum((iv.length for iv in cover), Q(0)) == eps * (1 - Q(1, 2**n))
    gap = finite_subcover(cover)
    assert isinstance(gap, Gap)
    assert 0 <= gap.witness <= 1 and not any(gap.witness in iv for iv in cover)


def test_singular_cover_radius_and_bounds():
    assert singular_cover([0], Q(1, 2)) == [op(Q(-1, 8), Q(1, 8))]
    for bad in (0, 1, Q(3, 2)):
        with pytest.raises(ValueError):
            singular_cover([0], bad)


def test_uncovered_point_inside_an_enlarged_window():
    rng = random.Random(2)
    eps = Q(1, 2)
    pts = [unit_rational(rng) for _ in range(30)]
    cover = singular_cover(pts, eps)
    delta = (1 - eps) / 4
    closed = [cl(iv.lo, iv.hi) for iv in cover]
    for n in range(31):
        x = uncovered_point(closed[:n], op(-delta, 1 + delta))
        assert not any(x in iv for iv in closed[:n])


# -- finite subcovers -----------------------------------------------------------


def test_subcover_examples():
    assert finite_subcover([op(Q(-1, 4), Q(3, 4)), op(Q(1, 2), Q(5, 4))]) == Covered((0, 1))
    assert finite_subcover([op(Q(-1, 4), Q(1, 2))]) == Gap(Q(3, 4), (Q(1, 2), Q(1)))
    # open intervals meeting at a point leave it uncovered
    gap = finite_subcover([op(-1, Q(1, 2)), op(Q(1, 2), 2)])
    assert isinstance(gap, Gap) and gap.witness == Q(1, 2)
    assert finite_subcover([op(-1, 2), op(5, 6)], n=0) == Gap(Q(1, 2), (Q(0), Q(1)))
    with pytest.raises(ValueError):
        finite_subcover([cl(0, 1)])


def _brute_covers(cover):
    ends = sorted({Q(0), Q(1)} | {e for iv in cover for e in (iv.lo, iv.hi) if 0 <= e <= 1})
    probes = ends + [(a + b) / 2 for a, b in zip(ends, ends[1:])]
    return all(any(x in iv for iv in cover) for x in probes)


def test_subcover_matches_brute_force():
    rng = random.Random(3)
    for _ in range(300):
        cover = random_open_cover(rng, rng.randint(0, 6))
        res = finite_subcover(cover)
        assert res.ok == _brute_covers(cover)
        if res.ok:
            assert _brute_covers([cover[i] for i in res.indices])
        else:
            assert not any(res.witness in iv for iv in cover)


# -- normalization --------------------------------------------------------------


def test_cd_first_stage():
    assert cd_interval(1, 0) == op(Q(1, 2), Q(7, 2))
    assert cd_interval(2, 0) == op(Q(1, 6), Q(10, 6))
    with pytest.raises(ValueError):
        cd_interval(0, 0)


def test_cd_endpoints_are_distinct_and_stages_cover_the_line():
    seen = {}
    for i in range(1, 6):
        ivs = [cd_interval(i, m) for m in range(-20, 21)]
        for a, b in zip(ivs, ivs[1:]):
            assert b.lo < a.hi
        for iv in ivs:
            for e in (iv.lo, iv.hi):
                assert e not in seen
                seen[e] = i


def test_cd_range_is_exact():
    rng = random.Random(4)
    for _ in range(100):
        i = rng.randint(1, 4)
        lo = Q(rng.randint(-30, 30), rng.randint(1, 10))
        hi = lo + Q(rng.randint(0, 60), rng.randint(1, 10))
        r = cd_range(i, lo, hi)
        inside = lambda m: lo <= cd_interval(i, m).lo and cd_interval(i, m).hi <= hi
        assert all(inside(m) for m in r)
        assert not inside(r.start - 1) and not inside(r.stop)


def test_first_stage_on_a_single_interval_is_empty():
    phases = normalize_phases([op(-1, 2)], 3)
    assert phases[0] == []
    # stage 2 intervals have width 1; those inside (-1, 2) are emitted
    assert phases[1] == [cd_interval(2, m) for m in cd_range(2, Q(-1), Q(2))]
    with pytest.raises(ValueError):
        normalize_phases([op(0, 1)], 0)


def _in_union(x, cover):
    return any(x in iv for iv in cover)


def test_normalization_is_well_behaved_and_inside_the_input():
    rng = random.Random(5)
    grid = [Q(k, 2**12) for k in range(-2**12, 2**13 + 1, 7)]
    for _ in range(40):
        cover = random_open_cover(rng, rng.randint(1, 8))
        out = normalize_well_behaved(cover, rng.randint(1, 6))
        assert well_behaved_report(out).ok
        for x in grid:
            if _in_union(x, out):
                assert _in_union(x, cover)


def test_well_behaved_report_flags_each_clause():
    rep = well_behaved_report([op(0, Q(1, 2)), op(Q(1, 2), 2), op(Q(3, 4), Q(7, 8))])
    assert rep.endpoint_hits == (0,)
    assert rep.abutting == ((0, 1),)
    assert rep.contained == ((2, 1),)
    assert not rep.ok


@pytest.mark.parametrize("case", range(20))
def test_subcover_status_survives_normalization(case):
    cover, covers = subcover_family()[case]
    assert finite_subcover(cover).ok is covers
    out = normalize_well_behaved(cover, 7)
    assert finite_subcover(out).ok is covers


# -- tents ----------------------------------------------------------------------


def test_tent_examples():
    cover = [op(-1, 1), op(Q(1, 2), Q(3, 4))]
    assert tent_sum(cover, 0, 1) == 1
    assert tent_sum(cover, 5, 2) == 0
    assert tent_sum(cover, 1, 2) == 0
    assert tent_sum(cover, Q(5, 8), 2) == Q(3, 8) + Q(1, 2)
    assert tent(op(0, 0), 0) == 0
    with pytest.raises(ValueError):
        tent_sum(cover, 0, 0)


def test_tent_sum_positive_exactly_on_the_union():
    rng = random.Random(6)
    for _ in range(50):
        cover = random_open_cover(rng, 6)
        for _ in range(20):
            x = Q(rng.randint(-40, 80), rng.randint(1, 40))
            sums = [tent_sum(cover, x, n) for n in range(1, 7)]
            assert sums == sorted(sums)
            for n, s in enumerate(sums, 1):
                assert (s > 0) == _in_union(x, cover[:n])


# -- cover files ----------------------------------------------------------------


def test_cover_file_round_trip():
    cover = [op(Q(-1, 4), Q(1, 2)), cl(Q(1, 3), Q(5, 4))]
    assert parse_cover(format_cover(cover)) == cover
    assert parse_cover("# header\n\nopen 0 1  # trailing\n") == [op(0, 1)]


@pytest.mark.parametrize("text,line", [
    ("open 0 1\nhalf 0 1\n", 2),
    ("open 0\n", 1),
    ("\nclosed 1/0 2\n", 2),
    ("open 0 1\n\nopen 2 1\n", 3),
])
def test_cover_file_errors_name_the_line(text, line):
    with pytest.raises(ValueError, match=f"line {line}:"):
        parse_cover(text)
