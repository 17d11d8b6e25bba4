import itertools

import pytest
from hypothesis import given, strategies as st

from emsimon.f2linalg import (
    BitWord, EquationSet, FullRank, RankDeficient, WidthMismatch,
    add_row, dot, nullspace_basis, orthogonal_complement, rank, solve_period, span,
)


def bw(s):
    return BitWord.parse(s)


def eqs(width, *rows):
    return EquationSet.from_words(width, [bw(r) for r in rows])


def words(width):
    return st.integers(0, (1 << width) - 1).map(lambda v: BitWord(width, v))


def brute_dot(x, y):
    return sum(int(a) * int(b) for a, b in zip(str(x), str(y))) % 2


class TestBitWord:
    def test_msb_first(self):
        w = bw("100")
        assert w.value == 4
        assert w.bit(0) == 1 and w.bit(2) == 0
        assert str(BitWord(4, 5)) == "0101"

    @pytest.mark.parametrize("text", ["", "012", "1" * 17, "ab"])
    def test_parse_rejects(self, text):
        with pytest.raises(ValueError):
            bw(text)

    def test_width_mismatch(self):
        with pytest.raises(WidthMismatch):
            bw("01") ^ bw("011")
        with pytest.raises(WidthMismatch):
            dot(bw("01"), bw("011"))

    @given(st.integers(1, 16).flatmap(lambda n: words(n)))
    def test_string_roundtrip(self, w):
        assert bw(str(w)) == w


class TestDot:
    @pytest.mark.parametrize("x, y, expected", [
        ("010", "100", 0), ("111", "101", 0), ("1101", "0101", 0), ("011", "001", 1),
    ])
    def test_examples(self, x, y, expected):
        assert dot(bw(x), bw(y)) == expected

    @given(st.integers(1, 10).flatmap(lambda n: st.tuples(words(n), words(n), words(n))))
    def test_linear_in_first_argument(self, xyz):
        x, y, z = xyz
        assert dot(x ^ y, z) == dot(x, z) ^ dot(y, z)

    @given(st.integers(1, 10).flatmap(lambda n: st.tuples(words(n), words(n))))
    def test_matches_componentwise_sum(self, xy):
        assert dot(*xy) == brute_dot(*xy)

    @pytest.mark.parametrize("n", range(1, 9))
    def test_orthogonal_half(self, n):
        for v in range(1, 1 << n):
            count = sum(1 for y in range(1 << n) if dot(BitWord(n, y), BitWord(n, v)) == 0)
            assert count == 1 << (n - 1)
            assert len(orthogonal_complement(BitWord(n, v))) == count


class TestEquationSet:
    def test_add_row_examples(self):
        e = EquationSet(3)
        assert add_row(e, bw("100")) is True
        assert add_row(e, bw("001")) is True
        assert add_row(e, bw("101")) is False
        assert rank(e) == 2

    def test_zero_and_duplicates_absorbed(self):
        e = eqs(3, "100")
        assert not e.add_row(bw("000"))
        assert not e.add_row(bw("100"))
        assert e.rank == 1

    def test_rank_examples(self):
        assert rank(EquationSet(3)) == 0
        assert rank(eqs(3, "100", "001")) == 2
        assert rank(eqs(3, "100", "001", "101")) == 2

    def test_width_checked(self):
        with pytest.raises(WidthMismatch):
            EquationSet(3).add_row(bw("0101"))

    @given(st.integers(1, 8).flatmap(lambda n: st.lists(words(n), max_size=12)))
    def test_rank_tracks_span(self, rows):
        if not rows:
            return
        n = rows[0].width
        e = EquationSet(n)
        for i, y in enumerate(rows):
            before = e.rank
            grew = e.add_row(y)
            assert e.rank == before + int(grew)
            assert e.rank <= n
            # brute-force rank: log2 of the span size
            assert 1 << e.rank == len(span(rows[: i + 1], n))
            assert y in e


class TestNullspace:
    def test_examples(self):
        assert len(nullspace_basis(EquationSet(2))) == 2
        assert nullspace_basis(eqs(3, "100", "001")) == [bw("010")]
        assert nullspace_basis(eqs(3, "100", "010", "001")) == []

    @given(st.integers(1, 7).flatmap(lambda n: st.lists(words(n), max_size=10)))
    def test_basis_spans_brute_force_complement(self, rows):
        if not rows:
            return
        n = rows[0].width
        e = EquationSet.from_words(n, rows)
        basis = nullspace_basis(e)
        assert len(basis) == n - e.rank
        brute = [s for s in range(1 << n) if all(dot(r, BitWord(n, s)) == 0 for r in rows)]
        assert sorted(span(basis, n)) == brute


class TestSolvePeriod:
    def test_published_examples(self):
        assert solve_period(eqs(3, "100", "001")) == bw("010")
        assert solve_period(eqs(4, "0010", "1101", "1010")) == bw("0101")

    def test_rank_errors(self):
        with pytest.raises(RankDeficient):
            solve_period(eqs(3, "100"))
        with pytest.raises(FullRank):
            solve_period(eqs(3, "100", "010", "001"))

    @pytest.mark.parametrize("n", range(2, 9))
    def test_exhaustive_against_scan(self, n):
        # every nonzero s recovered from a basis of s-perp, checked by brute-force scan
        for s in range(1, 1 << n):
            perp = [BitWord(n, y) for y in orthogonal_complement(BitWord(n, s))]
            e = EquationSet.from_words(n, perp)
            got = solve_period(e)
            scan = [c for c in range(1, 1 << n) if all(dot(r, BitWord(n, c)) == 0 for r in perp)]
            assert scan == [got.value] == [s]


def test_span_small():
    assert sorted(span([bw("100"), bw("001")], 3)) == [0, 1, 4, 5]
    assert list(itertools.islice(span([], 3), 5)) == [0]
