import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from spectralgap._rng import numpy_rng
from spectralgap.discrepancy import (
    COND1, COND2, FAIL, CertificateViolation, U_constant, couple_split_sums, discrepancy_check,
    dyadic_level_sets, edge_count, heavy_certificate, heavy_couple_count, verdict_from_counts,
)
from spectralgap.graphcore import DegreeSequencePair, Digraph01
from spectralgap.sampler import ChainConfig, sample_digraph
from spectralgap.spectral import bilinear_form, sample_unit_pair


def regular(n, d, seed):
    return sample_digraph(DegreeSequencePair.regular(n, d), ChainConfig.default(n * d, seed))


def unit(n, k):
    e = np.zeros(n)
    e[k] = 1.0
    return e


class TestEdgeCount:
    def test_examples(self):
        g = regular(12, 3, 0)
        assert edge_count(g, range(12), range(12)) == 36
        assert edge_count(g, [], range(12)) == 0
        assert edge_count(Digraph01(np.eye(3, dtype=np.uint8)), [0, 1], [1, 2]) == 1

    @pytest.mark.parametrize("seed", range(4))
    def test_dense(self, seed):
        rng = np.random.default_rng(seed)
        A = (rng.random((20, 20)) < 0.3).astype(np.uint8)
        S = rng.choice(20, 6, replace=False)
        T = rng.choice(20, 9, replace=False)
        assert edge_count(Digraph01(A), S, T) == int(A[np.ix_(S, T)].sum())


class TestVerdicts:
    def test_exact_expectation_is_cond1(self):
        g = regular(10, 4, 1)
        v = discrepancy_check(g, range(10), range(10), 1, 1, 4)
        assert v.verdict == COND1 and v.edges == 40 and v.expected == pytest.approx(40)

    def test_hand_built_six_vertex(self):
        A = np.zeros((6, 6), dtype=np.uint8)
        A[:3, :2] = 1  # six edges inside S x T with S = T = {0,1,2}
        g = Digraph01(A)
        S = [0, 1, 2]
        v1 = discrepancy_check(g, S, S, 2, 1, 1)
        assert v1.edges == 6 and v1.expected == pytest.approx(1.5) and v1.ratio == pytest.approx(4)
        # 6 ln 4 = 8.318 against K2 * 3 * ln(2e) = K2 * 5.079
        assert v1.verdict == FAIL
        assert discrepancy_check(g, S, S, 2, 2, 1).verdict == COND2
        assert discrepancy_check(g, S, S, 4, 1, 1).verdict == COND1

    def test_errors(self):
        g = regular(6, 2, 0)
        with pytest.raises(ValueError):
            discrepancy_check(g, [], [1], 2, 2, 2)
        with pytest.raises(ValueError):
            discrepancy_check(g, [0], [1], 0.5, 2, 2)

    def test_zero_edges(self):
        assert verdict_from_counts(0, 3, 3, 10, 2, 2, 2).verdict == COND1


class TestLevelSets:
    def test_flat(self):
        n = 9
        sets = dyadic_level_sets(np.full(n, 1 / 3))
        assert len(sets) == 1 and sets[0][0] == 1 and sets[0][1].tolist() == list(range(n))

    def test_basis_vector(self):
        sets = dyadic_level_sets(unit(16, 0))
        i = next(i for i in range(1, 10) if 2 ** (i - 1) <= 4 < 2 ** i)
        assert [(k, S.tolist()) for k, S in sets] == [(i, [0])]

    def test_zero(self):
        assert dyadic_level_sets(np.zeros(5)) == []

    @given(arrays(np.float64, st.integers(1, 64), elements=st.floats(-3, 3, allow_nan=False)))
    @settings(max_examples=150, deadline=None)
    def test_partition_and_predicate(self, x):
        n = x.size
        sets = dyadic_level_sets(x)
        members = np.concatenate([S for _, S in sets]) if sets else np.array([], dtype=int)
        assert len(set(members.tolist())) == members.size
        assert set(members.tolist()) == set(np.flatnonzero(np.abs(x) >= 1 / math.sqrt(n)).tolist())
        for i, S in sets:
            a = np.abs(x[S]) * math.sqrt(n)
            assert np.all((2.0 ** (i - 1) <= a) & (a < 2.0 ** i))


class TestCoupleSplit:
    def test_flat_vectors_all_light(self):
        g = regular(16, 4, 2)
        u = np.full(16, 0.25)
        light, heavy = couple_split_sums(g, u, u, 4)
        assert heavy == 0.0 and light == pytest.approx(4.0)

    def test_basis_heavy(self):
        g = Digraph01(np.ones((16, 16), dtype=np.uint8))
        e = unit(16, 0)
        assert couple_split_sums(g, e, e, 16) == (0.0, 1.0)

    def test_zero(self):
        g = regular(8, 2, 0)
        assert couple_split_sums(g, np.ones(8), np.zeros(8), 2) == (0.0, 0.0)

    def test_decomposition_and_heavy_count(self):
        rng = numpy_rng(3)
        for t in range(50):
            g = regular(64, 8, t)
            x, y = sample_unit_pair(64, rng)
            x = x ** 3 / np.linalg.norm(x ** 3)
            light, heavy = couple_split_sums(g, x, y, 8)
            b = bilinear_form(g, x, y)
            assert abs(light + heavy - b) <= 1e-10 * (1 + abs(b))
            c = heavy_couple_count(x, y, 8)
            dense = int(np.count_nonzero(np.abs(np.outer(x, y)) > math.sqrt(8) / 64))
            assert c == dense <= 64 ** 2 / 8


class TestCertificate:
    def test_U(self):
        K1, K2 = 2.0, 2.0
        expect = 32 + 24 + 64 + 16 * math.sqrt(6 * math.e) / (2 * math.log(2))
        assert U_constant(K1, K2) == pytest.approx(expect)
        with pytest.raises(ValueError):
            U_constant(1.0, 2.0)

    def test_flat_vacuous(self):
        g = regular(16, 4, 1)
        u = np.full(16, 0.25)
        cert = heavy_certificate(g, u, u, 2, 2, 4)
        assert cert.heavy_sum == 0.0 and cert.bound > 0 and cert.all_pass

    def test_all_ones_basis(self):
        g = Digraph01(np.ones((16, 16), dtype=np.uint8))
        e = unit(16, 0)
        cert = heavy_certificate(g, e, e, 2, 2, 16)
        assert len(cert.level_pairs) == 1
        i, j, v, _ = cert.level_pairs[0]
        assert v.edges == 1 and v.expected == pytest.approx(1.0) and v.verdict == COND1
        assert cert.all_pass and cert.heavy_sum == 1.0 <= cert.bound == pytest.approx(2 * cert.U * 4)

    def test_rejects_non_unit(self):
        g = regular(8, 2, 0)
        with pytest.raises(ValueError):
            heavy_certificate(g, np.ones(8), unit(8, 0), 2, 2, 2)
        with pytest.raises(ValueError):
            heavy_certificate(g, unit(8, 0), unit(8, 0), 1.0, 2, 2)

    def test_debug_diagnostics(self):
        g = regular(32, 4, 5)
        x, y = sample_unit_pair(32, numpy_rng(5))
        cert = heavy_certificate(g, x, y, 4, 2, 4, debug=True)
        assert set(cert.diagnostics) == {"alpha", "beta", "r", "s"}
        assert sum(cert.diagnostics["alpha"].values()) <= 4.0 + 1e-9

    def test_monte_carlo_implication(self):
        rng = numpy_rng(8)
        for t in range(200):
            g = regular(64, 8, 100 + t)
            x, y = sample_unit_pair(64, rng)
            cert = heavy_certificate(g, x, y, 3, 2, 8)
            if cert.all_pass:
                assert abs(cert.heavy_sum) <= cert.bound

    def test_violation_type(self):
        assert issubclass(CertificateViolation, AssertionError)
