"""Bell measurement engine: outcome distribution, datasets, estimator."""

from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

import oracles
from paulisample.bell import (
    BellDataset,
    DatasetTooSmallError,
    MarginalEstimator,
    bell_probabilities,
    bell_sample,
    eigenvalue_tables,
)
from paulisample.paulis import (
    PauliString,
    PureState,
    QubitOrdering,
    exact_marginal,
    pauli_distribution,
)
from paulisample.states import PauliNoiseChannel, make_product

RNG = np.random.default_rng(90210)


def dense_prefix_estimate(q, n, letters):
    """Estimator expectation computed from the full outcome distribution."""
    m, s = eigenvalue_tables()
    idx = np.arange(4**n)
    shifts = 2 * (n - 1 - np.arange(n))
    ycodes = (idx[:, None] >> shifts[None, :]) & 3
    w = np.ones(4**n)
    for j, c in enumerate(letters):
        w = w * m[c, ycodes[:, j]]
    for l in range(len(letters), n):
        w = w * s[ycodes[:, l]]
    q0 = float(q @ np.prod(s[ycodes], axis=1))
    return float(q @ w) / (q0 * 2 ** len(letters))


class TestTables:
    def test_frozen_values(self):
        m, s = eigenvalue_tables()
        assert m.tolist() == [
            [1, 1, 1, 1],
            [1, 1, -1, -1],
            [1, -1, 1, -1],
            [-1, 1, 1, -1],
        ]
        assert s.tolist() == [1, 1, 1, -1]

    def test_m_rows_are_two_copy_eigenvalues(self):
        m, _ = eigenvalue_tables()
        for c in range(4):
            letter = oracles.matrix_from_bits(list(divmod(c, 2)))
            two_copy = np.kron(letter, letter)
            for y in range(4):
                vec = oracles.bell_state_vector(list(divmod(y, 2)), 1)
                assert np.allclose(two_copy @ vec, m[c, y] * vec)

    def test_s_is_swap_eigenvalue(self):
        _, s = eigenvalue_tables()
        swap = np.eye(4)[[0, 2, 1, 3]]
        for y in range(4):
            vec = oracles.bell_state_vector(list(divmod(y, 2)), 1)
            assert np.allclose(swap @ vec, s[y] * vec)


class TestProbabilities:
    def test_zero_state_single_qubit(self):
        probs = bell_probabilities(PureState([1, 0]))
        assert np.allclose(probs, [0.5, 0.5, 0.0, 0.0])

    def test_t_state_values(self):
        state = make_product(1, ["t"])
        probs = bell_probabilities(state)
        assert probs == pytest.approx([0.25, 0.25, 0.5, 0.0], abs=1e-12)

    def test_matches_projective_oracle(self):
        for _ in range(3):
            psi = oracles.random_state(2, RNG)
            phi = oracles.random_state(2, RNG)
            mine = bell_probabilities(PureState(psi), PureState(phi))
            assert np.allclose(mine, oracles.bell_outcome_probs(psi, phi))

    def test_real_state_equals_pauli_distribution(self):
        psi = oracles.random_real_state(3, RNG)
        state = PureState(psi)
        assert np.allclose(bell_probabilities(state), pauli_distribution(state).probs)

    def test_normalized(self):
        psi = oracles.random_state(4, RNG)
        assert np.sum(bell_probabilities(PureState(psi))) == pytest.approx(1.0)

    def test_partner_size_mismatch(self):
        with pytest.raises(ValueError):
            bell_probabilities(PureState([1, 0]), PureState([1, 0, 0, 0]))


class TestSampling:
    def test_zero_state_outcome_split(self):
        shots = 4000
        data = bell_sample(PureState([1, 0]), shots, np.random.default_rng(2))
        codes = data.codes[:, 0]
        assert set(np.unique(codes)) <= {0, 1}
        sigma = np.sqrt(shots * 0.25)
        assert abs(np.sum(codes == 0) - shots / 2) < 3.5 * sigma

    def test_empirical_matches_dense(self):
        psi = oracles.random_state(2, RNG)
        data = bell_sample(PureState(psi), 200_000, np.random.default_rng(7))
        emp = oracles.empirical_codes(data.codes, 2)
        assert oracles.total_variation(emp, bell_probabilities(PureState(psi))) < 0.02

    def test_reproducible(self):
        psi = oracles.random_state(2, RNG)
        a = bell_sample(PureState(psi), 500, np.random.default_rng(3), seed=3)
        b = bell_sample(PureState(psi), 500, np.random.default_rng(3), seed=3)
        assert np.array_equal(a.codes, b.codes)
        assert a.seed == 3

    def test_noise_shifts_by_error_pair(self):
        n = 2
        psi = oracles.random_state(n, RNG)
        channel = PauliNoiseChannel(n, {"XI": 0.1, "ZZ": 0.15})
        clean = bell_probabilities(PureState(psi))
        branches = [(None, 1.0 - channel.total_rate)]
        branches += list(zip(channel.labels, channel.error_probs))
        mixed = np.zeros_like(clean)
        perm = np.arange(4**n)
        for la, pa in branches:
            for lb, pb in branches:
                shift = 0
                for lab in (la, lb):
                    if lab is not None:
                        shift ^= PauliString.from_label(lab).index()
                mixed += pa * pb * clean[perm ^ shift]
        data = bell_sample(PureState(psi), 200_000, np.random.default_rng(11), channel=channel)
        emp = oracles.empirical_codes(data.codes, n)
        assert oracles.total_variation(emp, mixed) < 0.02
        assert data.channel_text == "XI:0.1,ZZ:0.15"


class TestDatasetIO:
    def test_round_trip(self, tmp_path):
        psi = oracles.random_state(3, RNG)
        data = bell_sample(PureState(psi), 200, np.random.default_rng(1), seed=1,
                           state_digest="abc123")
        path = tmp_path / "shots.txt"
        data.save(path)
        back = BellDataset.load(path)
        assert back.n == 3 and back.shots == 200
        assert np.array_equal(back.codes, data.codes)
        assert back.seed == 1
        assert back.state_digest == "abc123"
        assert back.channel_text is None

    def test_rejects_unknown_header(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("#something-else v9\n#n=1\n#shots=0\n")
        with pytest.raises(ValueError, match="header"):
            BellDataset.load(path)

    def test_rejects_short_row(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("#bell-dataset v1\n#n=3\n#shots=1\n01\n")
        with pytest.raises(ValueError, match="length"):
            BellDataset.load(path)

    def test_rejects_bad_codes(self):
        with pytest.raises(ValueError):
            BellDataset(n=1, codes=np.array([[4]], dtype=np.uint8))


class TestEstimatorExactness:
    def test_dense_weighting_recovers_marginals(self):
        # expectation identity behind the whole estimator, checked densely
        n = 3
        for _ in range(3):
            psi = oracles.random_state(n, RNG)
            state = PureState(psi)
            q = bell_probabilities(state)
            for k in range(n + 1):
                for t in range(4**k):
                    letters = [(t >> (2 * (k - 1 - j))) & 3 for j in range(k)]
                    bits = [b for c in letters for b in divmod(c, 2)]
                    expect = exact_marginal(state, bits)
                    assert dense_prefix_estimate(q, n, letters) == pytest.approx(
                        expect, abs=1e-12
                    )

    def test_pure_state_purity_is_exactly_one(self):
        psi = oracles.random_state(3, RNG)
        data = bell_sample(PureState(psi), 2000, np.random.default_rng(4))
        est = MarginalEstimator(data)
        assert est.purity() == 1.0

    def test_single_shot_arithmetic(self):
        # one shot, worked by hand: codes (1, 2) on two qubits
        data = BellDataset(n=2, codes=np.array([[1, 2]], dtype=np.uint8))
        est = MarginalEstimator(data)
        m, s = eigenvalue_tables()
        assert est.purity() == float(s[1] * s[2]) == 1.0
        want = float(m[2, 1] * s[2]) / 2.0
        assert est.estimate_letter_prefix((2,)) == want == -0.5
        assert est.estimate_letter_prefix((2, 1)) == float(m[2, 1] * m[1, 2]) / 4.0


class TestEstimatorStatistics:
    def test_t_state_x_marginal(self):
        data = bell_sample(make_product(1, ["t"]), 100_000, np.random.default_rng(9))
        est = MarginalEstimator(data)
        value = est.estimate_marginal([1, 0])
        assert value == pytest.approx(0.25, abs=0.01)
        assert value == est.estimate_letter_prefix((2,))

    def test_all_marginals_scaled_accuracy(self):
        n = 3
        shots = 10_000
        state = make_product(n, ["zero"] * n)
        data = bell_sample(state, shots, np.random.default_rng(17))
        est = MarginalEstimator(data)
        worst = 0.0
        for k in range(1, n + 1):
            for t in range(4**k):
                letters = tuple((t >> (2 * (k - 1 - j))) & 3 for j in range(k))
                bits = [b for c in letters for b in divmod(c, 2)]
                err = abs(est.estimate_letter_prefix(letters) - exact_marginal(state, bits))
                worst = max(worst, err * (1 << k))
        assert worst < 6.0 / np.sqrt(shots)

    def test_ordering_reorders_marginals(self):
        n = 2
        state = make_product(n, ["zero", "plus"])
        data = bell_sample(state, 20_000, np.random.default_rng(23))
        flipped = QubitOrdering((2, 1))
        est_plain = MarginalEstimator(data)
        est_flip = MarginalEstimator(data, ordering=flipped)
        x_first = [1, 0]
        assert est_plain.estimate_marginal(x_first) == pytest.approx(
            exact_marginal(state, x_first), abs=0.05
        )
        assert est_flip.estimate_marginal(x_first) == pytest.approx(
            exact_marginal(state, x_first, ordering=flipped), abs=0.05
        )
        assert est_flip.estimate_marginal(x_first) > 0.4
        assert est_plain.estimate_marginal(x_first) < 0.1

    def test_noisy_purity_tracks_density_matrix(self):
        n = 2
        psi = oracles.random_state(n, RNG)
        rates = {"XI": 0.08, "ZY": 0.05}
        channel = PauliNoiseChannel(n, rates)
        rho = oracles.channel_density(np.outer(psi, psi.conj()), rates)
        target = float(np.trace(rho @ rho).real)
        data = bell_sample(PureState(psi), 40_000, np.random.default_rng(31), channel=channel)
        est = MarginalEstimator(data)
        assert est.purity() == pytest.approx(target, abs=0.02)


class TestEstimatorContract:
    def make_estimator(self, n=3, shots=5000, seed=41, **kwargs):
        psi = oracles.random_state(n, np.random.default_rng(seed))
        data = bell_sample(PureState(psi), shots, np.random.default_rng(seed + 1))
        return MarginalEstimator(data, **kwargs)

    def test_empty_prefix_is_one(self):
        est = self.make_estimator()
        assert est.estimate_marginal([]) == 1.0
        assert est.estimate_letter_prefix(()) == 1.0

    def test_odd_prefix_is_sum_of_extensions(self):
        est = self.make_estimator()
        for bits in ([0], [1], [1, 0, 0], [0, 1, 1, 0, 1]):
            lo = est.estimate_marginal(bits + [0])
            hi = est.estimate_marginal(bits + [1])
            assert est.estimate_marginal(bits) == lo + hi

    def test_estimates_are_not_clamped(self):
        data = BellDataset(n=1, codes=np.array([[1], [1]], dtype=np.uint8))
        est = MarginalEstimator(data)
        assert est.purity() == 1.0
        assert est.estimate_letter_prefix((2,)) == -0.5

    def test_nonpositive_purity_raises(self):
        data = BellDataset(n=1, codes=np.array([[3]], dtype=np.uint8))
        est = MarginalEstimator(data)
        assert est.purity() == -1.0
        with pytest.raises(DatasetTooSmallError):
            est.estimate_letter_prefix((0,))
        assert est.estimate_marginal([]) == 1.0

    def test_input_validation(self):
        est = self.make_estimator()
        with pytest.raises(ValueError):
            est.estimate_marginal([0, 2])
        with pytest.raises(ValueError):
            est.estimate_marginal([0] * 7)
        with pytest.raises(ValueError):
            est.estimate_letter_prefix((4,))
        with pytest.raises(ValueError):
            MarginalEstimator(BellDataset(n=1, codes=np.zeros((0, 1), dtype=np.uint8)))

    def test_small_cache_still_correct(self):
        big = self.make_estimator(seed=47)
        small = self.make_estimator(seed=47, cache_size=2)
        prefixes = [(c1, c2, c3) for c1 in range(4) for c2 in range(4) for c3 in range(4)]
        for letters in prefixes:
            assert small.estimate_letter_prefix(letters) == big.estimate_letter_prefix(letters)
        assert small.stats.front_evictions > 0

    def test_repeat_queries_hit_scalar_cache(self):
        est = self.make_estimator()
        first = est.estimate_letter_prefix((1, 2))
        misses = est.stats.front_misses
        assert est.estimate_letter_prefix((1, 2)) == first
        assert est.stats.front_misses == misses

    def test_thread_pool_matches_sequential(self):
        shared = self.make_estimator(seed=53)
        reference = self.make_estimator(seed=53)
        prefixes = [(c1, c2, c3) for c1 in range(4) for c2 in range(4) for c3 in range(4)]
        expected = [reference.estimate_letter_prefix(p) for p in prefixes]
        with ThreadPoolExecutor(max_workers=8) as pool:
            got = list(pool.map(shared.estimate_letter_prefix, prefixes))
        assert got == expected
