import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from omckit import phasematch as P

finite = st.floats(-1e3, 1e3, allow_nan=False)
wavevec = st.floats(-1e8, 1e8, allow_nan=False)
lengths = st.floats(1e-7, 1e-4)

A = 188e-9
N = 31


class TestSinc:
    def test_removable_singularity(self):
        assert P.suppression_factor(0.0, 1.0) == 1.0

    def test_first_null(self):
        L = 2e-6
        assert P.suppression_factor(math.pi / L, L) == pytest.approx(0.0, abs=1e-15)

    def test_two_pi_null(self):
        assert P.sinc_abs(2 * math.pi) == pytest.approx(0.0, abs=1e-15)

    def test_rejects_nonpositive_length(self):
        with pytest.raises(ValueError):
            P.suppression_factor(1.0, 0.0)
        with pytest.raises(ValueError):
            P.envelope_factor(1.0, -1.0)

    @given(finite)
    def test_even(self, x):
        assert P.sinc_abs(x) == P.sinc_abs(-x)

    @given(finite)
    def test_bounded_by_envelope(self, x):
        s = P.sinc_abs(x)
        assert 0.0 <= s <= 1.0
        assert s <= min(1.0, 1.0 / abs(x)) + 1e-15 if x else s == 1.0

    def test_series_crossover_is_continuous(self):
        c = P.SERIES_CUTOFF
        below = P.sinc_abs(np.nextafter(c, 0))
        above = P.sinc_abs(c)
        assert abs(above - below) <= 1e-15

    def test_vectorised(self):
        out = P.sinc_abs(np.array([0.0, math.pi, 1e-9]))
        assert out.shape == (3,)
        assert out[0] == 1.0


class TestTerms:
    def test_forms(self):
        w = P.WavevectorSet(1.0, 0.25, 3.0, -5.0, 1.0)
        d = P.mismatches(w)
        assert d == {"i": 3.0, "ii": 3.75, "iii": 2.25, "iv": -5.0, "v": -4.25, "vi": -5.75}

    def test_suspended_limit(self):
        w = P.WavevectorSet(1e7, 1e7, 0.0, 0.0, N * A)
        rep = P.term_mismatches(w)
        for t in ("i", "iv"):
            assert rep[t].delta_k == 0.0
            assert rep[t].suppression == 1.0

    def test_zone_edge_matches_cross_terms(self):
        w = P.zone_edge_wavevectors(A, N)
        rep = P.term_mismatches(w)
        assert rep["iii"].delta_k == 0.0 and rep["v"].delta_k == 0.0
        assert rep["iii"].suppression == 1.0 and rep["v"].suppression == 1.0
        assert rep.matched_terms() == ("iii", "v")

    def test_co_propagating_envelope(self):
        rep = P.term_mismatches(P.zone_edge_wavevectors(A, N))
        assert abs(rep["i"].phase) == pytest.approx(math.pi * N, rel=1e-12)
        assert 1.0 / rep["i"].envelope == pytest.approx(97.39, abs=0.01)
        assert rep["i"].suppression < 1e-12  # exact sinc null at an integer multiple of pi

    def test_sign_branch_of_matched_terms(self):
        # with k_mf = -k_mb = k_m, (iii) and (v) vanish for k_m = +(k_of - k_ob)
        k_o = 1e7
        w = P.WavevectorSet.standing(k_o, 2 * k_o, 3e-6)
        assert P.mismatches(w)["iii"] == 0.0
        assert P.SIGN_BRANCH["iii"] == P.SIGN_BRANCH["v"] == "+"
        assert P.classify_interaction(w).branches == ("+",)

    def test_opposite_branch_matches_other_pair(self):
        k_o = 1e7
        w = P.WavevectorSet.standing(k_o, -2 * k_o, 3e-6)
        assert P.term_mismatches(w).matched_terms() == ("ii", "vi")
        assert P.classify_interaction(w).branches == ("-",)

    @given(wavevec, wavevec, wavevec, wavevec, lengths)
    def test_swap_permutes_terms(self, kof, kob, kmf, kmb, L):
        w = P.WavevectorSet(kof, kob, kmf, kmb, L)
        a, b = P.mismatches(w), P.mismatches(w.swapped())
        for s, t in (("i", "iv"), ("ii", "vi"), ("iii", "v")):
            assert abs(a[s]) == abs(b[t])
            assert abs(a[t]) == abs(b[s])

    @given(wavevec, wavevec, wavevec, wavevec, lengths)
    def test_report_bounds(self, kof, kob, kmf, kmb, L):
        rep = P.term_mismatches(P.WavevectorSet(kof, kob, kmf, kmb, L))
        for e in rep.entries:
            assert 0.0 <= e.suppression <= 1.0
            assert e.suppression <= e.envelope + 1e-15

    def test_rejects_nonpositive_length(self):
        with pytest.raises(ValueError):
            P.WavevectorSet(0, 0, 0, 0, 0.0)

    def test_table_and_dict(self):
        rep = P.term_mismatches(P.zone_edge_wavevectors(A, N))
        assert len(rep.table().splitlines()) == 7
        d = rep.to_dict()
        assert [t["term"] for t in d["terms"]] == list(P.TERMS)
        with pytest.raises(KeyError):
            rep["vii"]


class TestClassify:
    def test_zone_edge_is_counter_propagating(self):
        c = P.classify_interaction(P.zone_edge_wavevectors(A, N))
        assert c.kind == "counter_propagating"
        assert c.dominant == ("iii", "v")
        assert not c.ambiguous

    def test_all_zero_is_ambiguous(self):
        c = P.classify_interaction(P.WavevectorSet(0, 0, 0, 0, 1e-6))
        assert c.ambiguous
        assert set(c.dominant) == set(P.TERMS)

    def test_mismatched_mechanics_matches_nothing(self):
        k_o = math.pi / (2 * A)
        c = P.classify_interaction(P.WavevectorSet.standing(k_o, 1.5 * k_o, N * A))
        assert c.kind == "none"
        assert c.dominant == ()

    def test_suspended_limit_flags_ambiguity(self):
        # with k_of = k_ob the cross terms lose their phase too, so both channels pass
        c = P.classify_interaction(P.WavevectorSet(1e7, 1e7, 0.0, 0.0, N * A))
        assert c.ambiguous
        assert {"i", "iv"} <= set(c.dominant)

    def test_co_propagating_only(self):
        # low-k mechanics with counter-propagating optics: only (i) and (iv) survive
        k_o = math.pi / (2 * A)
        c = P.classify_interaction(P.WavevectorSet.standing(k_o, 1e3, N * A))
        assert c.kind == "co_propagating"
        assert c.dominant == ("i", "iv")

    @pytest.mark.parametrize("thr", [0.0, 1.0, -0.1, 1.5])
    def test_threshold_range(self, thr):
        with pytest.raises(ValueError):
            P.classify_interaction(P.zone_edge_wavevectors(A, N), thr)
