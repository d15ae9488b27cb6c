from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qualmotion.signs import (
    ALL_DEFINITE,
    MINUS,
    NONZERO_DEFINITE,
    PLUS,
    STAR,
    ZERO,
    ZERO_VEC,
    QuantizationConfig,
    Sign,
    SignSet,
    SignVec,
    big_sum,
    inverse,
    negate,
    quantize,
    sign_add,
    sign_mul,
    sign_sub,
    vec_add,
    vec_cross,
    vec_dot,
)

# Operation tables transcribed by hand: rows are the left operand, columns
# the right operand, both in the order + 0 -, and "*" is the full set.
ADD_TABLE = {"+": "++*", "0": "+0-", "-": "*--"}
SUB_TABLE = {"+": "*++", "0": "-0+", "-": "--*"}
MUL_TABLE = {"+": "+0-", "0": "000", "-": "-0+"}
ORDER = "+0-"

SETS = [SignSet(m) for m in range(1, 8)]
sign_sets = st.integers(1, 7).map(SignSet)
sign_vecs = st.tuples(sign_sets, sign_sets, sign_sets).map(lambda t: SignVec(*t))
definite_vecs = st.sampled_from(ALL_DEFINITE)
# exact zeros or magnitudes whose products neither underflow nor overflow
components = st.one_of(st.just(0.0), st.floats(1e-3, 1e3), st.floats(-1e3, -1e-3))


def V(text: str) -> SignVec:
    return SignVec.of(text)


def _cell(table: dict[str, str], a: str, b: str) -> SignSet:
    return SignSet.parse(table[a][ORDER.index(b)])


def _union(table: dict[str, str], a: SignSet, b: SignSet) -> SignSet:
    out = 0
    for x in a:
        for y in b:
            out |= int(_cell(table, str(SignSet(x)), str(SignSet(y))))
    return SignSet(out)


OPS = [("add", sign_add, ADD_TABLE), ("sub", sign_sub, SUB_TABLE), ("mul", sign_mul, MUL_TABLE)]


class TestTables:
    @pytest.mark.parametrize("name,op,table", OPS)
    @pytest.mark.parametrize("a,b", list(itertools.product(ORDER, ORDER)))
    def test_definite_cell(self, name, op, table, a, b):
        assert op(SignSet.parse(a), SignSet.parse(b)) == _cell(table, a, b)

    @pytest.mark.parametrize("name,op,table", OPS)
    def test_set_inputs_are_unions_of_cells(self, name, op, table):
        for a, b in itertools.product(SETS, SETS):
            assert op(a, b) == _union(table, a, b), (name, str(a), str(b))

    def test_add_examples(self):
        assert sign_add(PLUS, MINUS) == STAR
        assert sign_add(ZERO, ZERO) == ZERO
        assert sign_add(PLUS | ZERO, MINUS) == STAR

    def test_sub_examples(self):
        assert sign_sub(PLUS, PLUS) == STAR
        assert sign_sub(ZERO, MINUS) == PLUS
        for s in (PLUS, ZERO, MINUS):
            assert sign_sub(s, ZERO) == s

    def test_mul_examples(self):
        assert sign_mul(MINUS, MINUS) == PLUS
        for s in SETS:
            assert sign_mul(ZERO, s) == ZERO
        assert sign_mul(PLUS | MINUS, PLUS) == PLUS | MINUS

    def test_mul_has_no_indefinite_cell(self):
        for a, b in itertools.product((PLUS, ZERO, MINUS), repeat=2):
            assert sign_mul(a, b).is_definite


class TestSignSet:
    def test_three_signs(self):
        assert len(Sign) == 3
        assert len({PLUS, ZERO, MINUS}) == 3

    def test_negate_is_involution(self):
        for s in SETS:
            assert negate(negate(s)) == s

    def test_empty_set_rejected(self):
        with pytest.raises(ValueError):
            SignSet(0)
        with pytest.raises(ValueError):
            SignSet.parse("[]")

    def test_singleton_is_the_sign(self):
        assert SignSet([Sign.PLUS]) is PLUS
        assert SignSet.parse("[+]") is PLUS

    @pytest.mark.parametrize("text", ["+", "-", "0", "[+0]", "[-0]", "[+-]", "[+-0]"])
    def test_parse_str_round_trip(self, text):
        assert SignSet.parse(str(SignSet.parse(text))) == SignSet.parse(text)

    def test_star_is_full_set(self):
        assert SignSet.parse("*") == STAR
        assert len(STAR) == 3

    @pytest.mark.parametrize("bad", ["", "x", "++", "[+x]"])
    def test_parse_rejects(self, bad):
        with pytest.raises(ValueError):
            SignSet.parse(bad)


class TestVectors:
    def test_vec_add_examples(self):
        assert vec_add(ZERO_VEC, V("+-0")) == V("+-0")
        assert vec_add(V("+00"), V("-00")) == SignVec(STAR, ZERO, ZERO)
        assert vec_add(V("++0"), V("+-0")) == SignVec(PLUS, STAR, ZERO)

    def test_vec_cross_examples(self):
        assert vec_cross(V("+00"), V("0+0")) == V("00+")
        for v in ALL_DEFINITE:
            assert ZERO_VEC in vec_cross(v, v).denotation()
            assert vec_cross(ZERO_VEC, v) == ZERO_VEC

    def test_vec_dot_examples(self):
        assert vec_dot(V("+00"), V("+00")) == PLUS
        assert vec_dot(V("+00"), V("0+0")) == ZERO
        assert vec_dot(V("++0"), V("+-0")) == STAR

    def test_inverse_examples(self):
        assert inverse(V("+-0")) == V("-+0")
        assert inverse(ZERO_VEC) == ZERO_VEC
        assert inverse(SignVec(PLUS | ZERO, ZERO, ZERO)).x == MINUS | ZERO

    def test_big_sum_examples(self):
        assert big_sum([]) == ZERO_VEC
        assert big_sum([V("+00")]) == V("+00")
        assert big_sum([V("+00"), V("-00"), V("00-")]) == SignVec(STAR, ZERO, MINUS)

    def test_denotation_size(self):
        v = SignVec(STAR, PLUS | ZERO, MINUS)
        assert len(v.denotation()) == 6
        assert all(d.is_definite for d in v.denotation())

    def test_definite_vectors(self):
        assert len(ALL_DEFINITE) == 27
        assert len(set(ALL_DEFINITE)) == 27
        assert len(NONZERO_DEFINITE) == 26

    def test_encoding_round_trip(self):
        v = SignVec(PLUS, MINUS | ZERO, STAR)
        assert SignVec.parse(v.encode()) == v
        assert v.encode() == ["+", "[-0]", "[+-0]"]


class TestQuantize:
    def test_examples(self):
        assert quantize((3.2, -0.1, 0.0), 0.05) == V("+-0")
        assert quantize((0.0, 0.0, 0.0), 7.0) == ZERO_VEC
        assert quantize((0.04, -0.04, 1.0), QuantizationConfig(0.05)) == V("00+")

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            quantize((float("nan"), 0.0, 0.0))
        with pytest.raises(ValueError):
            quantize((0.0, float("inf"), 0.0))

    def test_negative_epsilon_rejected(self):
        with pytest.raises(ValueError):
            QuantizationConfig(-1.0)


class TestProperties:
    @given(sign_sets, sign_sets, sign_sets)
    def test_monotone(self, a, a2, b):
        bigger = a | a2
        for op in (sign_add, sign_sub, sign_mul):
            assert op(a, b).issubset(op(bigger, b))
            assert op(b, a).issubset(op(b, bigger))

    @given(sign_sets, sign_sets, sign_sets)
    def test_add_commutative_associative(self, a, b, c):
        assert sign_add(a, b) == sign_add(b, a)
        assert sign_add(sign_add(a, b), c) == sign_add(a, sign_add(b, c))

    @given(definite_vecs, definite_vecs)
    def test_cross_antisymmetric(self, a, b):
        assert vec_cross(a, b).denotation() == inverse(vec_cross(b, a)).denotation()

    @given(st.lists(sign_vecs, max_size=6), st.randoms())
    def test_big_sum_permutation_invariant(self, vs, rnd):
        shuffled = list(vs)
        rnd.shuffle(shuffled)
        assert big_sum(vs) == big_sum(shuffled)

    @given(st.tuples(*[components] * 3), st.tuples(*[components] * 3))
    def test_sound_on_numeric_pairs(self, u, w):
        u, w = np.array(u), np.array(w)
        qu, qw = quantize(u), quantize(w)
        assert quantize(u + w) in vec_add(qu, qw)
        assert quantize(np.cross(u, w)) in vec_cross(qu, qw)
        assert quantize([float(u @ w), 0.0, 0.0]).x in vec_dot(qu, qw)
