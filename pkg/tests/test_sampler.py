import itertools

import numpy as np
import pytest

from spectralgap import _chain
from spectralgap._rng import mix_seed, numpy_rng, xoshiro_state
from spectralgap.graphcore import DegreeSequencePair, Digraph01, URegGraph
from spectralgap.sampler import (
    ChainConfig, DigraphChain, EnumerationTooLarge, InfeasibleDegrees, chi_square_uniformity,
    circulant_regular, count_all, digraph_stream, enumerate_all, initial_digraph, sample_digraph,
    sample_undirected, switch_step, undirected_stream,
)

from oracles import count_by_column_profile


def reg(n, d):
    return DegreeSequencePair.regular(n, d)


class TestEnumeration:
    def test_two_permutations(self):
        mats = enumerate_all(reg(2, 1))
        assert sorted(m.adj.tolist() for m in mats) == [[[0, 1], [1, 0]], [[1, 0], [0, 1]]]

    def test_n3_d2_complements_permutations(self):
        mats = enumerate_all(reg(3, 2))
        comps = {(1 - m.adj).tobytes() for m in mats}
        perms = {np.eye(3, dtype=np.uint8)[list(p)].tobytes()
                 for p in itertools.permutations(range(3))}
        assert len(mats) == 6 and comps == perms

    def test_n4_d2_matches_profile_counter(self):
        assert len(enumerate_all(reg(4, 2))) == 90 == count_by_column_profile((2,) * 4, (2,) * 4)

    @pytest.mark.parametrize("d_in,d_out", [((3, 1, 0, 2), (1, 2, 2, 1)), ((2, 2, 1), (1, 2, 2)),
                                            ((1, 1, 1, 1, 2), (2, 1, 1, 1, 1)), ((5, 0, 0, 0, 0), (1,) * 5)])
    def test_counts_match_profile_counter(self, d_in, d_out):
        deg = DegreeSequencePair(d_in, d_out)
        mats = enumerate_all(deg)
        assert len(mats) == count_by_column_profile(d_out, d_in) == count_all(deg)
        assert len({m.key() for m in mats}) == len(mats)
        for m in mats:
            assert m.deg == deg

    def test_guard(self):
        with pytest.raises(EnumerationTooLarge, match="C\\("):
            enumerate_all(reg(7, 3))

    def test_deterministic_order(self):
        a = [m.key() for m in enumerate_all(reg(4, 2))]
        assert a == [m.key() for m in enumerate_all(reg(4, 2))]


class TestSwitch:
    def test_identity_switches_to_antidiagonal(self):
        g = Digraph01(np.eye(2, dtype=np.uint8))
        rng = numpy_rng(1)
        for _ in range(50):
            if switch_step(g, rng):
                break
        else:
            pytest.fail("no switch accepted")
        assert g.adj.tolist() == [[0, 1], [1, 0]]

    def test_all_ones_never_switches(self):
        g = Digraph01(np.ones((3, 3), dtype=np.uint8))
        rng = numpy_rng(2)
        assert not any(switch_step(g, rng) for _ in range(200))

    def test_margins_invariant_python_step(self):
        deg = DegreeSequencePair((3, 1, 0, 2), (1, 2, 2, 1))
        g = initial_digraph(deg)
        rng = numpy_rng(3)
        for _ in range(100):
            switch_step(g, rng)
            assert g.deg == deg
        g.validate()

    def test_switch_is_self_inverse(self):
        adj = np.array([[1, 0], [0, 1]], dtype=np.uint8)
        once = adj.copy()
        once[0, 0] = once[1, 1] = 0
        once[0, 1] = once[1, 0] = 1
        twice = once.copy()
        twice[0, 1] = twice[1, 0] = 0
        twice[0, 0] = twice[1, 1] = 1
        assert np.array_equal(twice, adj)
        g = Digraph01(adj.copy())
        rng = numpy_rng(5)
        while not switch_step(g, rng):
            pass
        while not switch_step(g, rng):
            pass
        assert np.array_equal(g.adj, adj)

    def test_kernel_fuzz_million_steps(self):
        deg = DegreeSequencePair(np.array([5, 3, 4, 2, 6, 1, 3, 4]), np.array([4, 4, 4, 3, 3, 3, 3, 4]))
        g = initial_digraph(deg)
        state = xoshiro_state(9)
        accepted = _chain.digraph_switches(g.adj, g.src, g.dst, state, 1_000_000)
        g.invalidate()
        assert accepted > 0
        assert g.deg == deg
        g.validate()

    def test_undirected_kernel_fuzz(self):
        n, d = 12, 5
        g = URegGraph(circulant_regular(n, d), d)
        _chain.ugraph_switches(g.adj, g.eu, g.ev, xoshiro_state(4), 200_000)
        h = URegGraph(g.adj, d)
        assert sorted(map(tuple, np.sort(np.c_[g.eu, g.ev], axis=1).tolist())) == h.edges()


class TestDigraphSampling:
    def test_n2_d1(self):
        g = sample_digraph(reg(2, 1), ChainConfig.default(2, 77))
        assert g.adj.tolist() in ([[0, 1], [1, 0]], [[1, 0], [0, 1]])

    def test_infeasible(self):
        with pytest.raises(InfeasibleDegrees):
            sample_digraph(DegreeSequencePair((2, 0), (2, 0)), ChainConfig(10, 1, 0))

    def test_deterministic(self):
        cfg = ChainConfig.default(64, 12)
        assert sample_digraph(reg(16, 4), cfg) == sample_digraph(reg(16, 4), cfg)
        a = [g.key() for g in digraph_stream(reg(8, 3), cfg, 5)]
        assert a == [g.key() for g in digraph_stream(reg(8, 3), cfg, 5)]

    def test_different_seeds_differ(self):
        a = sample_digraph(reg(16, 4), ChainConfig.default(64, 1))
        b = sample_digraph(reg(16, 4), ChainConfig.default(64, 2))
        assert a != b

    def test_greedy_start_is_valid(self):
        deg = DegreeSequencePair((4, 4, 0, 0, 2), (2, 2, 2, 2, 2))
        g = initial_digraph(deg)
        assert g.deg == deg

    def test_reachability_n3_d2(self):
        deg = reg(3, 2)
        universe = {m.key() for m in enumerate_all(deg)}
        chain = DigraphChain(deg, ChainConfig(0, 1, 3))
        seen = set()
        for _ in range(100_000):
            seen.add(chain.next().key())
            if seen == universe:
                break
        assert seen == universe

    def test_uniform_small(self):
        deg = reg(3, 2)
        index = {m.key(): i for i, m in enumerate(enumerate_all(deg))}
        counts = np.zeros(6, dtype=int)
        for g in digraph_stream(deg, ChainConfig(1000, 50, 21), 12_000):
            counts[index[g.key()]] += 1
        assert chi_square_uniformity(counts)[1] > 0.001


class TestUndirected:
    def test_k4_forced(self):
        g = sample_undirected(4, 3, ChainConfig.default(6, 5))
        assert g.adj.tolist() == (1 - np.eye(4, dtype=int)).tolist()

    def test_zero_burn_in_is_cycle(self):
        g = sample_undirected(6, 2, ChainConfig(0, 1, 0))
        assert sorted(g.edges()) == [(0, 1), (0, 5), (1, 2), (2, 3), (3, 4), (4, 5)]

    def test_parity(self):
        with pytest.raises(ValueError):
            sample_undirected(5, 3, ChainConfig(0, 1, 0))
        with pytest.raises(ValueError):
            sample_undirected(4, 4, ChainConfig(0, 1, 0))

    def test_pairing_cross_check_and_guard(self):
        g = sample_undirected(10, 3, ChainConfig(0, 1, 8), method="pairing")
        assert g.d == 3
        with pytest.raises(ValueError):
            sample_undirected(20, 6, ChainConfig(0, 1, 8), method="pairing")

    def test_edge_marginals_equal(self):
        n, d, N = 8, 3, 50_000
        freq = np.zeros((n, n))
        for g in undirected_stream(n, d, ChainConfig(2000, 100, 0), N):
            freq += g.adj
        iu = np.triu_indices(n, 1)
        f = freq[iu] / N
        p = d / (n - 1)
        se = np.sqrt(p * (1 - p) / N)
        assert np.all(np.abs(f - p) <= 3 * se), np.abs(f - p).max() / se


class TestChiSquare:
    def test_equal_counts(self):
        stat, p = chi_square_uniformity([10, 10, 10])
        assert stat == 0.0 and p == pytest.approx(1.0)

    def test_point_mass(self):
        stat, p = chi_square_uniformity([1000, 0, 0, 0])
        assert stat == pytest.approx(1000 * 3) and p < 1e-100

    def test_errors(self):
        with pytest.raises(ValueError):
            chi_square_uniformity([0, 0])
        with pytest.raises(ValueError):
            chi_square_uniformity([5])
        with pytest.raises(ValueError):
            chi_square_uniformity([1, 2], total=4)

    def test_simulated_uniform_p_values_spread(self):
        ps = []
        for r in range(40):
            rng = numpy_rng(mix_seed(99, r))
            counts = np.bincount(rng.integers(0, 90, 9000), minlength=90)
            ps.append(chi_square_uniformity(counts)[1])
        ps = np.array(ps)
        assert 0.2 < ps.mean() < 0.8 and (ps < 0.5).any() and (ps > 0.5).any()


def test_chain_config_validation():
    with pytest.raises(ValueError):
        ChainConfig(-1, 1, 0)
    with pytest.raises(ValueError):
        ChainConfig(0, 0, 0)
    cfg = ChainConfig.default(100, 3)
    assert cfg.spacing_switches == 200 and cfg.burn_in_switches == int(20 * 100 * np.log(101))
