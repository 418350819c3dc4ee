from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from gwstack import (
    CacheConflictError,
    InsertionKey,
    MemoCache,
    Reconstructor,
    build_p1b,
    build_p2,
    closed_4pt_deg0,
    closed_4pt_deg1,
    e_cut,
    forced_degree,
)
from gwstack.engine import _bounded_multisets

F = Fraction


class TestInsertionKey:
    def test_normalizes_and_exposes_n(self):
        key = InsertionKey("P(1,3)", 0, (2, 1, 2, 1))
        assert key.insertions == (1, 1, 2, 2)
        assert key.n == 4

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            InsertionKey("P(1,3)", -1, (1, 1))
        with pytest.raises(ValueError):
            InsertionKey("P(1,3)", 0, (1,))


class TestMemoCache:
    def test_idempotent_put(self):
        cache = MemoCache()
        cache.put((1, 1, 2, 2), F(-1, 9))
        cache.put((1, 1, 2, 2), F(-1, 9))
        assert cache.get((1, 1, 2, 2)) == F(-1, 9)
        assert len(cache) == 1
        assert (1, 1, 2, 2) in cache

    def test_conflicting_put_raises(self):
        cache = MemoCache()
        cache.put((1, 1, 2, 2), F(-1, 9))
        with pytest.raises(CacheConflictError):
            cache.put((1, 1, 2, 2), F(-1, 8))

    def test_zero_values_are_cached(self):
        rec = Reconstructor(build_p1b(3))
        assert rec.gw((0, 2, 2, 2)) == 0  # forced degree 0, killed by the identity
        assert (0, 2, 2, 2) in rec.cache


class TestForcedDegree:
    def test_examples(self):
        td5 = build_p1b(5)
        assert forced_degree(td5, (4, 4, 4, 4)) == 1
        assert forced_degree(td5, (4,) * 10) == 0
        assert forced_degree(td5, (2, 4)) == 1
        assert forced_degree(td5, (1, 1)) is None
        assert forced_degree(build_p2(), (2,) * 5) == 2
        assert forced_degree(build_p1b(3), (0, 0)) == 0

    def test_rejects_short_input(self):
        with pytest.raises(ValueError):
            forced_degree(build_p1b(3), (1,))

    @settings(max_examples=200)
    @given(st.integers(1, 8), st.lists(st.integers(0, 8), min_size=2, max_size=9))
    def test_integer_path_matches_rational_path(self, b, raw):
        td = build_p1b(b)
        ins = tuple(k % (b + 1) for k in raw)
        assert Reconstructor(td).forced(ins) == forced_degree(td, ins)


class TestClosedForms:
    def test_e_cut(self):
        assert e_cut(5, 5) == 1
        assert e_cut(5, 6) == 0
        assert e_cut(5, 0) == 1
        with pytest.raises(ValueError):
            e_cut(0, 1)
        with pytest.raises(ValueError):
            e_cut(3, -1)

    def test_degree_zero_examples(self):
        assert closed_4pt_deg0(2, 1, 1, 1, 1) == F(-1, 4)
        assert closed_4pt_deg0(3, 1, 1, 2, 2) == F(-1, 9)
        assert closed_4pt_deg0(4, 2, 2, 2, 2) == F(-1, 8)
        assert closed_4pt_deg0(5, 2, 2, 3, 3) == F(-2, 25)
        assert closed_4pt_deg0(6, 3, 3, 3, 3) == F(-1, 12)

    def test_degree_one_examples(self):
        assert closed_4pt_deg1(5, 4, 4, 4, 4) == F(1, 125)
        assert closed_4pt_deg1(2, 1, 2, 2, 2) == F(1, 8)
        assert closed_4pt_deg1(1, 1, 1, 1, 1) == 1

    def test_domain_violations(self):
        with pytest.raises(ValueError):
            closed_4pt_deg0(3, 1, 1, 1, 1)  # wrong sum
        with pytest.raises(ValueError):
            closed_4pt_deg0(3, 0, 2, 2, 2)  # identity exponent
        with pytest.raises(ValueError):
            closed_4pt_deg0(3, 3, 1, 1, 1)  # divisor exponent
        with pytest.raises(ValueError):
            closed_4pt_deg1(3, 1, 2, 3, 3)  # wrong sum


class TestGw:
    def test_known_values(self, engines):
        assert engines.p1b(2).gw((1, 1, 1, 1)) == F(-1, 4)
        assert engines.p1b(3).gw((1, 1, 2, 2)) == F(-1, 9)
        assert engines.p1b(4).gw((2, 2, 2, 2)) == F(-1, 8)
        assert engines.p1b(4).gw((3,) * 8) == F(-5, 512)
        assert engines.p1b(5).gw((4,) * 10) == F(-49, 15625)
        assert engines.p1b(6).gw((5,) * 12) == F(-5663, 5038848)

    def test_divisor_insertion(self, engines):
        # <a^1, x, x, x> at degree 1 peels to a 3-point constant.
        assert engines.p1b(2).gw((1, 2, 2, 2)) == F(1, 8)
        key = (4, 4, 4, 4)
        rec = engines.p1b(5)
        assert rec.gw(key + (5,)) == F(1, 5) * rec.gw(key)

    def test_identity_insertion_kills(self, engines):
        assert engines.p1b(3).gw((0, 1, 1, 2)) == 0
        assert engines.p1b(5).gw((0, 4, 4, 4, 4)) == 0

    def test_unforced_degree_gives_zero(self, engines):
        assert engines.p1b(3).gw((1, 1, 1, 1)) == 0
        assert engines.p1b(3).gw((1, 1)) == 0

    def test_two_point_passthrough(self, engines):
        assert engines.p1b(5).gw((2, 4)) == F(1, 5)

    def test_degenerate_two_point_rejected(self):
        rec = Reconstructor(build_p1b(3))
        with pytest.raises(ValueError, match="degenerate"):
            rec.gw((0, 0))

    def test_input_validation(self):
        rec = Reconstructor(build_p1b(3))
        with pytest.raises(ValueError):
            rec.gw((1,))
        with pytest.raises(ValueError):
            rec.gw((1, 7))
        with pytest.raises(ValueError):
            rec.gw((-1, 1))

    def test_gw_at(self, engines):
        rec = engines.p1b(5)
        assert rec.gw_at((4, 4, 4, 4), 1) == F(1, 125)
        assert rec.gw_at((4, 4, 4, 4), 0) == 0
        assert rec.gw_at((4, 4, 4, 4), 2) == 0

    @settings(max_examples=150, deadline=None)
    @given(
        st.integers(1, 6),
        st.lists(st.integers(0, 6), min_size=3, max_size=8),
        st.randoms(use_true_random=False),
    )
    def test_permutation_invariance(self, b, raw, rng):
        td = build_p1b(b)
        rec = Reconstructor(td)
        ins = [k % (b + 1) for k in raw]
        value = rec.gw(ins)
        shuffled = list(ins)
        rng.shuffle(shuffled)
        assert rec.gw(shuffled) == value


class TestKontsevichNumbers:
    def test_first_counts(self, engines):
        rec = engines.p2()
        assert rec.gw((2, 2)) == 1  # one line through two points
        assert rec.gw((2,) * 5) == 1  # one conic through five
        assert rec.gw((2,) * 8) == 12  # twelve rational cubics through eight


class TestWdvvResidual:
    def test_spot_instances(self, engines):
        assert engines.p1b(4).wdvv_residual(3, 3, 2, 3, (), 1) == 0
        assert engines.p1b(6).wdvv_residual(5, 5, 4, 5, (5,), 2) == 0
        assert engines.p2().wdvv_residual(2, 2, 2, 2, (2, 2), 2) == 0

    def test_randomized_sample(self, engines):
        rng = random.Random(7)
        for rec in (engines.p1b(2), engines.p1b(4), engines.p2()):
            size = rec.td.basis_size
            for _ in range(60):
                picks = [rng.randrange(size) for _ in range(4)]
                deltas = tuple(rng.randrange(size) for _ in range(rng.randrange(4)))
                beta3 = rng.randrange(3)
                assert rec.wdvv_residual(*picks, deltas, beta3) == 0

    def test_input_validation(self, engines):
        rec = engines.p1b(3)
        with pytest.raises(ValueError):
            rec.wdvv_residual(1, 1, 1, 1, (), -1)
        with pytest.raises(ValueError):
            rec.wdvv_residual(1, 1, 9, 1, (), 0)


class TestDonorPolicy:
    def test_unknown_policy_rejected(self):
        with pytest.raises(ValueError):
            Reconstructor(build_p1b(3), donor_policy="widest")

    @pytest.mark.parametrize("b", [2, 3, 4])
    def test_policies_agree(self, b):
        td = build_p1b(b)
        default = Reconstructor(td)
        alternate = Reconstructor(td, donor_policy="smallest")
        for key, value in default.enumerate_nonzero():
            assert alternate.gw_at(key.insertions, key.d) == value


class _TracingReconstructor(Reconstructor):
    """Asserts the (n, b - max exponent) measure drops on every descent."""

    def __init__(self, td, **kwargs):
        super().__init__(td, **kwargs)
        self._stack = []

    def _reduce(self, ins, d):
        measure = (len(ins), self.td.power_basis - max(ins))
        if self._stack:
            assert measure < self._stack[-1], (measure, self._stack)
        self._stack.append(measure)
        try:
            return super()._reduce(ins, d)
        finally:
            self._stack.pop()


class TestTermination:
    @pytest.mark.parametrize("b,key", [(5, (4,) * 10), (6, (5,) * 12), (3, (1, 1, 2, 2))])
    def test_measure_strictly_decreases(self, b, key):
        rec = _TracingReconstructor(build_p1b(b))
        rec.gw(key)  # the tracer raises on any non-decreasing step
        assert not rec._stack


class TestEnumerate:
    def test_b3_support(self, engines):
        rows = list(engines.p1b(3).enumerate_nonzero())
        assert [(key.d, key.insertions) for key, _ in rows] == [
            (0, (1, 1, 2, 2)),
            (0, (1, 2, 2, 2, 2)),
            (0, (2, 2, 2, 2, 2, 2)),
        ]
        assert [value for _, value in rows] == [F(-1, 9), F(1, 27), F(-1, 27)]

    def test_caps(self, engines):
        rec = engines.p1b(5)
        assert len(list(rec.enumerate_nonzero())) == 22
        assert len(list(rec.enumerate_nonzero(max_d=0))) == 21
        four_point = list(rec.enumerate_nonzero(max_n=4))
        assert all(key.n == 4 for key, _ in four_point)
        assert len(four_point) == 6

    def test_b1_is_empty(self, engines):
        assert list(engines.p1b(1).enumerate_nonzero()) == []

    def test_include_flags_require_caps(self, engines):
        rec = engines.p1b(2)
        with pytest.raises(ValueError, match="max_n and max_d"):
            next(iter(rec.enumerate_nonzero(include_divisor=True)))

    def test_include_divisor(self, engines):
        rows = dict(
            engines.p1b(2).enumerate_nonzero(
                max_n=4, max_d=2, include_divisor=True
            )
        )
        assert rows == {
            InsertionKey("P(1,2)", 0, (1, 1, 1, 1)): F(-1, 4),
            InsertionKey("P(1,2)", 1, (1, 2, 2, 2)): F(1, 8),
        }

    def test_include_fundamental_adds_nothing_nonzero(self, engines):
        rows = dict(
            engines.p1b(2).enumerate_nonzero(
                max_n=5, max_d=1, include_fundamental=True
            )
        )
        assert rows == {InsertionKey("P(1,2)", 0, (1, 1, 1, 1)): F(-1, 4)}

    def test_needs_power_basis(self, engines):
        with pytest.raises(ValueError, match="power basis"):
            next(iter(engines.p2().enumerate_nonzero()))


class TestPreload:
    def test_cached_value_short_circuits(self):
        rec = Reconstructor(build_p1b(3))
        rec.preload([(0, (1, 1, 2, 2), F(7))])
        assert rec.gw((1, 1, 2, 2)) == 7

    def test_degree_mismatch_rejected(self):
        rec = Reconstructor(build_p1b(3))
        with pytest.raises(ValueError, match="not forced"):
            rec.preload([(1, (1, 1, 2, 2), F(-1, 9))])

    def test_small_records_checked_against_constants(self):
        rec = Reconstructor(build_p1b(3))
        rec.preload([(0, (1, 1, 1), F(1, 3))])  # consistent, not stored
        assert (1, 1, 1) not in rec.cache
        with pytest.raises(ValueError, match="conflicts"):
            rec.preload([(0, (1, 1, 1), F(1, 2))])

    def test_snapshot_round_trip(self):
        rec = Reconstructor(build_p1b(4))
        rec.gw((2,) * 8)
        snap = rec.snapshot()
        fresh = Reconstructor(build_p1b(4))
        fresh.preload(snap)
        assert fresh.snapshot() == snap


class TestBoundedMultisets:
    def test_enumeration(self):
        assert list(_bounded_multisets(2, 1, 3, 4)) == [(1, 3), (2, 2)]
        assert list(_bounded_multisets(0, 1, 3, 0)) == [()]
        assert list(_bounded_multisets(3, 1, 2, 7)) == []

    @given(st.integers(1, 5), st.integers(0, 3), st.integers(3, 6), st.integers(0, 20))
    def test_matches_brute_force(self, n, lo, hi, total):
        got = list(_bounded_multisets(n, lo, hi, total))
        assert got == sorted(got)
        assert len(set(got)) == len(got)
        for tup in got:
            assert len(tup) == n and sum(tup) == total
            assert all(lo <= v <= hi for v in tup)
            assert tuple(sorted(tup)) == tup
        import itertools

        brute = {
            tup
            for tup in itertools.combinations_with_replacement(range(lo, hi + 1), n)
            if sum(tup) == total
        }
        assert set(got) == brute
