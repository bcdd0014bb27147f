import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import literal_smashed
from smashfilter.errors import DimensionError, OrderError
from smashfilter.mach import MachFilter, build_filter
from smashfilter.sensing import CompressedVideo, compress, compressed_temporal_derivative, jl_report, make_matrix
from smashfilter.stsf import (
    FilterBank,
    oracle_bank,
    oracle_response,
    response_bank,
    smashed_response,
)
from smashfilter.volume import correlate3, frames_to_matrix, temporal_derivative


def sensed(video, K, seed=0, dist="gaussian"):
    P, Q, _ = video.shape
    m = make_matrix(dist, seed, K, P * Q)
    return compressed_temporal_derivative(compress(video, m)), m


def rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


class TestFilterBank:
    def test_actions_in_first_appearance_order(self, rng):
        fs = [MachFilter(rng.standard_normal((2, 2, 2)), label=l) for l in "bab"]
        bank = FilterBank(fs)
        assert bank.actions == ["b", "a"] and bank.filter_to_action == [0, 1, 0]
        assert len(bank) == 3

    def test_unknown_label(self, rng):
        with pytest.raises(ValueError):
            FilterBank([MachFilter(np.ones((2, 2, 2)), label="x")], actions=["y"])


class TestSmashedResponse:
    def test_zero_measurements(self):
        z, m = sensed(np.zeros((8, 8, 5)), 10)
        r = smashed_response(z, MachFilter(np.ones((3, 3, 2))), m)
        assert r.shape == (6, 6, 3) and not r.data.any()
        assert r.provenance == "smashed"

    def test_literal_double_loop(self, rng):
        video = rng.standard_normal((12, 12, 6))
        filt = rng.standard_normal((4, 4, 3))
        z, m = sensed(video, 36, seed=5)
        got = smashed_response(z, MachFilter(filt), m).data
        want = literal_smashed(temporal_derivative(video), filt, m.entries)
        assert np.abs(got - want).max() <= 1e-6 * np.abs(want).max()

    def test_requires_differenced_input(self, rng):
        video = rng.standard_normal((6, 6, 4))
        m = make_matrix("gaussian", 0, 8, 36)
        with pytest.raises(OrderError):
            smashed_response(compress(video, m), MachFilter(np.ones((2, 2, 2))), m)

    def test_filter_too_large(self, rng):
        z, m = sensed(rng.standard_normal((6, 6, 4)), 8)
        with pytest.raises(DimensionError):
            smashed_response(z, MachFilter(np.ones((2, 2, 4))), m)

    def test_converges_to_oracle(self):
        g = np.random.default_rng(3)
        video = g.standard_normal((10, 10, 5))
        f = MachFilter(g.standard_normal((4, 4, 2)))
        oracle = oracle_response(video, f).data
        D = 100
        wins = 0
        for seed in range(20):
            z_full, m_full = sensed(video, D, seed)
            z_eighth, m_eighth = sensed(video, D // 8, seed)
            full = smashed_response(z_full, f, m_full).data
            eighth = smashed_response(z_eighth, f, m_eighth).data
            wins += rel(full, oracle) < rel(eighth, oracle)
        assert wins >= 18


class TestOracleResponse:
    def test_matched_filter_peak(self, rng):
        example = rng.standard_normal((6, 5, 5))
        f = build_filter([example], 1, 0, 0, normalize=False)
        video = np.zeros((14, 13, 9))
        video[:6, :5, :5] = example
        video[:6, :5, 5] = example[:, :, 4]
        r = oracle_response(video, f).data
        assert np.unravel_index(np.argmax(r), r.shape) == (0, 0, 0)

    def test_composition_oracle(self, rng):
        video = rng.standard_normal((9, 8, 6))
        filt = rng.standard_normal((3, 4, 2))
        r = oracle_response(video, MachFilter(filt))
        np.testing.assert_allclose(r.data, correlate3(temporal_derivative(video), filt).data, atol=1e-12)
        assert r.provenance == "oracle"

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(-5, 5))
    def test_linearity(self, seed, lam):
        g = np.random.default_rng(seed)
        video = g.standard_normal((7, 6, 5))
        f = MachFilter(g.standard_normal((3, 3, 2)))
        np.testing.assert_allclose(
            oracle_response(lam * video, f).data, lam * oracle_response(video, f).data, atol=1e-9
        )


class TestResponseBank:
    def test_singleton(self, rng):
        z, m = sensed(rng.standard_normal((8, 8, 5)), 16)
        f = MachFilter(rng.standard_normal((3, 3, 2)))
        [r] = response_bank(z, FilterBank([f]), m)
        np.testing.assert_array_equal(r.data, smashed_response(z, f, m).data)

    def test_duplicate_filters(self, rng):
        z, m = sensed(rng.standard_normal((8, 8, 5)), 16)
        f = MachFilter(rng.standard_normal((3, 3, 2)))
        a, b = response_bank(z, FilterBank([f, f]), m)
        np.testing.assert_array_equal(a.data, b.data)

    def test_bit_identical_to_individual_calls(self, rng):
        z, m = sensed(rng.standard_normal((10, 9, 6)), 20)
        fs = [MachFilter(rng.standard_normal(s), label="a") for s in [(3, 3, 2), (4, 2, 3), (2, 5, 1)]]
        for r, f in zip(response_bank(z, FilterBank(fs), m), fs):
            np.testing.assert_array_equal(r.data, smashed_response(z, f, m).data)

    def test_oracle_bank(self, rng):
        video = rng.standard_normal((8, 8, 5))
        fs = [MachFilter(rng.standard_normal((3, 3, 2))), MachFilter(rng.standard_normal((2, 4, 3)))]
        for r, f in zip(oracle_bank(video, FilterBank(fs)), fs):
            np.testing.assert_array_equal(r.data, oracle_response(video, f).data)

    def test_order_error(self, rng):
        video = rng.standard_normal((6, 6, 4))
        m = make_matrix("gaussian", 0, 8, 36)
        with pytest.raises(OrderError):
            response_bank(compress(video, m), FilterBank([MachFilter(np.ones((2, 2, 2)))]), m)

    def test_deterministic(self, rng):
        video = rng.standard_normal((8, 8, 5))
        f = FilterBank([MachFilter(rng.standard_normal((3, 3, 2)))])
        z1, m1 = sensed(video, 16, seed=9)
        z2, m2 = sensed(video, 16, seed=9)
        a, b = response_bank(z1, f, m1), response_bank(z2, f, m2)
        np.testing.assert_array_equal(a[0].data, b[0].data)


def unit_frames(v):
    return v / np.linalg.norm(v, axis=(0, 1), keepdims=True)


def test_error_bracket_shrinks_with_K():
    """Unit frames and unit filter slices: error at every offset stays within N times the JL spread."""
    P = Q = 16
    D, N = P * Q, 3
    Ks = [D // 64, D // 16, D // 4]
    maxima = {K: [] for K in Ks}
    for seed in range(10):
        g = np.random.default_rng(100 + seed)
        d = unit_frames(g.standard_normal((P, Q, 6)))
        filt = unit_frames(g.standard_normal((4, 4, N)))
        exact = correlate3(d, filt).data
        for K in Ks:
            m = make_matrix("gaussian", seed, K, D)
            # feed already-differenced frames straight in as the sensed stream
            z = CompressedVideo(m.entries @ frames_to_matrix(d), (P, Q), m, 0.0, 1)
            err = np.abs(smashed_response(z, MachFilter(filt), m).data - exact).max()
            eps = jl_report("gaussian", seed, K, D, 200, vector_seed=seed).max_abs_error
            assert err <= 2 * N * eps
            maxima[K].append(err)
    medians = [np.median(maxima[K]) for K in Ks]
    assert medians[0] > medians[1] > medians[2]
