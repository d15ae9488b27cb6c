from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qualmotion.dynamics import (
    CapExceeded,
    ContactGeometry,
    ObjectState,
    QualitativeAction,
    QualitativeForce,
    StateChange,
    change_entailed,
    delta_envelope,
    find_witness,
    gravity,
    heuristic_resistant_add,
    heuristic_resistant_add_vec,
    is_vanishing_point,
    no_attraction_region,
    numeric_state_change,
    satisfies_no_attraction,
    state_change,
    third_law_pair,
)
from qualmotion.oracle.random_forces import random_attraction_config, random_force_set, random_vanishing_config
from qualmotion.signs import ALL_DEFINITE, MINUS, PLUS, STAR, ZERO, ZERO_VEC, SignVec, big_sum, quantize, sign_add, vec_cross

definite_vecs = st.sampled_from(ALL_DEFINITE)


def V(text: str) -> SignVec:
    return SignVec.of(text)


def F(qd: str, qr: str, obj: str = "o") -> QualitativeForce:
    return QualitativeForce(V(qd), V(qr), obj)


def C(dqv: str, dqw: str) -> StateChange:
    return StateChange(V(dqv), V(dqw))


def brute_envelope(forces: list[QualitativeForce]) -> set[StateChange]:
    """Direct evaluation: every subset, its two sums, their Cartesian product."""
    out = set()
    for k in range(len(forces) + 1):
        for sub in itertools.combinations(forces, k):
            lin = big_sum(f.qd for f in sub)
            ang = big_sum(vec_cross(f.qr, f.qd) for f in sub)
            out |= {StateChange(a, b) for a in lin.denotation() for b in ang.denotation()}
    return out


class TestTypes:
    def test_gravity(self):
        g = gravity("a")
        assert g.qd == V("00-") and g.qr == ZERO_VEC and g.object == "a"

    def test_729_states(self):
        states = {ObjectState(v, w) for v in ALL_DEFINITE for w in ALL_DEFINITE}
        assert len(states) == 729

    def test_zero_action_rejected(self):
        with pytest.raises(ValueError):
            QualitativeAction(F("000", "+00"))

    def test_state_change(self):
        before = ObjectState(ZERO_VEC, ZERO_VEC)
        after = ObjectState(V("+0-"), V("0+0"))
        assert state_change(before, after) == C("+0-", "0+0")
        assert numeric_state_change((0, 0, 0), (1.0, 0, -2), (0, 0, 0), (0, 0.5, 0)) == C("+0-", "0+0")

    def test_numeric_normal_must_match(self):
        with pytest.raises(ValueError):
            ContactGeometry(V("00+"), ZERO_VEC, ZERO_VEC, (0.0, 0.0, -1.0))


class TestEnvelope:
    def test_gravity_only(self):
        assert delta_envelope([gravity("o")]) == {C("000", "000"), C("00-", "000")}

    def test_empty(self):
        assert delta_envelope([]) == {C("000", "000")}

    def test_opposed_pair(self):
        env = delta_envelope([F("+00", "00-"), F("-00", "00-")])
        assert C("+00", "0+0") in env
        assert C("-00", "0-0") in env
        for x, y in itertools.product((PLUS, ZERO, MINUS), repeat=2):
            assert StateChange(SignVec(x, ZERO, ZERO), SignVec(ZERO, y, ZERO)) in env

    def test_matches_brute_force(self):
        rng = np.random.default_rng(3)
        for _ in range(40):
            n = int(rng.integers(0, 5))
            forces = [QualitativeForce(ALL_DEFINITE[rng.integers(27)], ALL_DEFINITE[rng.integers(27)], "o") for _ in range(n)]
            assert delta_envelope(forces) == brute_envelope(forces)

    def test_entailment_examples(self):
        g = [gravity("o")]
        assert change_entailed(C("000", "000"), [F("+++", "+++")])
        assert change_entailed(C("00-", "000"), g)
        assert not change_entailed(C("+00", "000"), g)

    def test_entailment_agrees_with_envelope(self):
        forces = [gravity("o"), F("00+", "-0-"), F("+00", "0+0")]
        env = delta_envelope(forces)
        for v in ALL_DEFINITE:
            for w in ALL_DEFINITE:
                assert change_entailed(StateChange(v, w), forces) == (StateChange(v, w) in env)

    def test_cap(self):
        forces = [gravity("o")] * 13
        with pytest.raises(CapExceeded):
            delta_envelope(forces)
        with pytest.raises(CapExceeded):
            change_entailed(NO_CHANGE_NONZERO, forces)
        assert change_entailed(C("00-", "000"), forces[:12])

    def test_twelve_forces_under_cap(self):
        forces = [QualitativeForce(ALL_DEFINITE[i], ALL_DEFINITE[26 - i], "o") for i in range(12)]
        assert delta_envelope(forces, cap=12)

    def test_mixed_objects_rejected(self):
        with pytest.raises(ValueError):
            delta_envelope([gravity("a"), gravity("b")])

    def test_witness(self):
        forces = [gravity("o"), F("00+", "000"), F("+00", "00+")]
        w = find_witness(C("+0-", "0+0"), forces)
        assert w is not None
        sub = [forces[i] for i in w.subset]
        assert C("+0-", "0+0") in brute_envelope(sub)
        assert find_witness(C("-00", "000"), forces) is None

    @given(st.lists(st.tuples(definite_vecs, definite_vecs), max_size=4), st.lists(st.tuples(definite_vecs, definite_vecs), max_size=2))
    @settings(max_examples=60, deadline=None)
    def test_monotone(self, base, extra):
        d = [QualitativeForce(a, b, "o") for a, b in base]
        d2 = d + [QualitativeForce(a, b, "o") for a, b in extra]
        assert delta_envelope(d) <= delta_envelope(d2)

    def test_lemma_sample(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            fs = random_force_set(rng)
            assert change_entailed(fs.change(), fs.qualitative())


NO_CHANGE_NONZERO = C("+00", "000")


class TestResistant:
    def test_paper_example(self):
        assert heuristic_resistant_add_vec(V("+-0"), V("--0")) == SignVec(MINUS | ZERO, MINUS, ZERO)

    def test_zero_resistance(self):
        for v in ALL_DEFINITE:
            assert heuristic_resistant_add_vec(ZERO_VEC, v) == v

    def test_nothing_to_cancel(self):
        assert heuristic_resistant_add_vec(V("+00"), ZERO_VEC) == ZERO_VEC

    def test_subset_of_plain_sum_when_other_nonzero(self):
        for r in range(1, 8):
            for o in (1, 4, 5):
                assert heuristic_resistant_add(r, o).issubset(sign_add(r, o))

    def test_zero_other_stays_zero(self):
        for r in range(1, 8):
            assert heuristic_resistant_add(r, ZERO) == ZERO

    def test_resistant_flags_prune(self):
        forces = [gravity("o"), F("00+", "000")]
        assert change_entailed(C("00+", "000"), forces)
        assert not change_entailed(C("00+", "000"), forces, resistant=[False, True])
        assert change_entailed(C("000", "000"), forces, resistant=[False, True])


class TestRules:
    def test_resting_pair_not_vanishing(self):
        geom = ContactGeometry(V("00+"), V("00-"), V("00+"))
        assert not is_vanishing_point(ObjectState(), ObjectState(), geom)

    def test_lifting_off_vanishes(self):
        geom = ContactGeometry(V("00+"), V("00-"), V("00+"))
        assert is_vanishing_point(ObjectState(V("00+"), ZERO_VEC), ObjectState(), geom)

    def test_numeric_override(self):
        geom = ContactGeometry(V("00+"), V("00-"), V("00+"), (0.0, 0.0, 1.0))
        moving_up = ObjectState(V("00+"), ZERO_VEC)
        assert not is_vanishing_point(moving_up, ObjectState(), geom, ((0, 0, -0.3), (0, 0, 0)))

    def test_no_attraction_examples(self):
        n = V("00+")
        assert satisfies_no_attraction(V("00+"), n)
        assert not satisfies_no_attraction(V("00-"), n)
        assert satisfies_no_attraction(V("+00"), n)

    def test_no_attraction_side(self):
        geom = ContactGeometry(V("00+"), V("00-"), V("00+"), (0.0, 0.0, 1.0))
        assert satisfies_no_attraction(V("00-"), geom, side="b")
        assert not satisfies_no_attraction(V("00+"), geom, side="b")
        assert satisfies_no_attraction(V("00+"), geom, numeric_direction=(0, 0.2, 0.1))

    @pytest.mark.parametrize("normal", ALL_DEFINITE)
    def test_region_cover_is_exact(self, normal):
        covered = set().union(*(b.denotation() for b in no_attraction_region(normal)))
        assert covered == {v for v in ALL_DEFINITE if satisfies_no_attraction(v, normal)}

    def test_axis_normal_single_box(self):
        assert no_attraction_region(V("00+")) == [SignVec(STAR, STAR, PLUS | ZERO)]

    def test_third_law(self):
        assert third_law_pair(V("+0-")) == V("-0+")
        assert third_law_pair(ZERO_VEC) == ZERO_VEC
        assert third_law_pair(V("+-0")) == V("-+0")

    @given(definite_vecs)
    def test_third_law_involution(self, v):
        assert third_law_pair(third_law_pair(v)) == v

    def test_lemma_two_sample(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            cfg = random_vanishing_config(rng)
            if not cfg.numeric_vanishing():
                assert not is_vanishing_point(*cfg.qualitative())
            f, n = random_attraction_config(rng)
            if float(f @ n) >= 0:
                assert satisfies_no_attraction(quantize(f, 0.0), quantize(n, 0.0))
