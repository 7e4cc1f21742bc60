import math
from fractions import Fraction

import numpy as np
import pytest

from tracecrit import (
    CqEnsemble,
    LeakSpec,
    ProbDist,
    average_probe,
    condition_on_leak,
    ensemble_from_json,
    ensemble_to_json,
    single_bit_pure_example,
    spiked_distribution,
    tensor,
    two_bit_pkl_example,
    uniform_key_state,
    validate_density,
)
from tracecrit.criteria import criterion_d_averaged
from tracecrit.ensembles import bit_strings
from tracecrit.errors import BadOverlap, BadParams, DimMismatch, TooLarge, ZeroMass

from helpers import random_density, random_ensemble


class TestProbDist:
    def test_uniform_is_exact(self):
        p = ProbDist.uniform(("a", "b", "c"))
        assert p.probs == (Fraction(1, 3),) * 3
        assert sum(p.probs) == 1

    def test_rejects_negative_mass(self):
        with pytest.raises(BadParams, match="negative"):
            ProbDist(("a", "b"), (1.2, -0.2))

    def test_rejects_bad_total(self):
        with pytest.raises(BadParams, match="sum"):
            ProbDist(("a", "b"), (0.6, 0.6))

    def test_rejects_duplicate_labels(self):
        with pytest.raises(BadParams, match="unique"):
            ProbDist(("a", "a"), (0.5, 0.5))

    def test_clamps_float_noise(self):
        p = ProbDist(("a", "b"), (1.0 + 1e-13, -1e-13))
        assert p.probs[1] == 0.0

    def test_support(self):
        p = ProbDist(("a", "b", "c"), (0.5, 0.0, 0.5))
        assert p.support() == ("a", "c")


class TestBitStrings:
    def test_orderings(self):
        assert bit_strings(0) == ("",)
        assert bit_strings(1) == ("0", "1")
        assert bit_strings(2) == ("00", "01", "10", "11")


class TestUniformKeyState:
    def test_single_bit(self):
        np.testing.assert_array_equal(uniform_key_state(1).matrix, np.eye(2) / 2)

    def test_two_bits(self):
        np.testing.assert_array_equal(uniform_key_state(2).matrix, np.eye(4) / 4)

    def test_trace_exact(self):
        for n in range(0, 7):
            assert float(uniform_key_state(n).matrix.trace().real) == 1.0

    def test_size_cap(self):
        with pytest.raises(TooLarge):
            uniform_key_state(7)


class TestAverageProbe:
    def test_equal_probes(self):
        rng = np.random.default_rng(0)
        rho = random_density(rng, 3)
        e = CqEnsemble(
            1, ProbDist.uniform(bit_strings(1)), {"0": rho, "1": rho}
        )
        np.testing.assert_allclose(average_probe(e).matrix, rho.matrix, atol=1e-12)

    def test_orthogonal_single_bit_gives_mixed(self):
        e = single_bit_pure_example(0.0)
        np.testing.assert_allclose(average_probe(e).matrix, np.eye(2) / 2, atol=1e-12)

    def test_two_bit_family_average(self):
        rng = np.random.default_rng(1)
        sigma, rho1, rho2 = (random_density(rng, 2) for _ in range(3))
        e = two_bit_pkl_example(sigma, rho1, rho2)
        expected = tensor(sigma.matrix, (rho1.matrix + rho2.matrix) / 2)
        np.testing.assert_allclose(average_probe(e).matrix, expected, atol=1e-12)

    def test_always_valid_density(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            e = random_ensemble(rng, 2, 3, uniform_prior=False)
            average_probe(e)  # validation happens inside


class TestSingleBitPureExample:
    def test_orthogonal_probes_reach_half(self):
        assert criterion_d_averaged(single_bit_pure_example(0.0)) == pytest.approx(
            0.5, abs=1e-12
        )

    def test_identical_probes(self):
        assert criterion_d_averaged(single_bit_pure_example(1.0)) == pytest.approx(
            0.0, abs=1e-9
        )

    def test_intermediate_overlap(self):
        assert criterion_d_averaged(single_bit_pure_example(0.6)) == pytest.approx(
            0.4, abs=1e-12
        )

    def test_probe_overlap_is_c(self):
        e = single_bit_pure_example(0.37)
        overlap = np.trace(e.probe("0").matrix @ e.probe("1").matrix).real
        assert overlap == pytest.approx(0.37**2, abs=1e-12)

    def test_bad_overlap(self):
        with pytest.raises(BadOverlap):
            single_bit_pure_example(1.5)


class TestTwoBitFamily:
    def test_identical_components_give_zero(self):
        rng = np.random.default_rng(3)
        sigma, rho = random_density(rng, 2), random_density(rng, 2)
        e = two_bit_pkl_example(sigma, rho, rho)
        assert criterion_d_averaged(e) == pytest.approx(0.0, abs=1e-9)

    def test_orthogonal_components(self):
        sigma = validate_density(np.eye(2) / 2)
        rho1 = validate_density(np.diag([1.0, 0.0]))
        rho2 = validate_density(np.diag([0.0, 1.0]))
        e = two_bit_pkl_example(sigma, rho1, rho2)
        assert criterion_d_averaged(e) == pytest.approx(0.5, abs=1e-12)

    def test_diagonal_mixed_components(self):
        sigma = validate_density(np.eye(2) / 2)
        rho1 = validate_density(np.diag([0.6, 0.4]))
        rho2 = validate_density(np.diag([0.1, 0.9]))
        e = two_bit_pkl_example(sigma, rho1, rho2)
        assert criterion_d_averaged(e) == pytest.approx(0.25, abs=1e-12)

    def test_probe_assignment(self):
        rng = np.random.default_rng(4)
        sigma, rho1, rho2 = (random_density(rng, 2) for _ in range(3))
        e = two_bit_pkl_example(sigma, rho1, rho2)
        np.testing.assert_array_equal(e.probe("00").matrix, e.probe("11").matrix)
        np.testing.assert_array_equal(e.probe("01").matrix, e.probe("10").matrix)

    def test_rejects_non_qubit(self):
        rng = np.random.default_rng(5)
        with pytest.raises(DimMismatch):
            two_bit_pkl_example(
                random_density(rng, 3), random_density(rng, 2), random_density(rng, 2)
            )


class TestSpikedDistribution:
    def test_peak_mass_by_construction(self):
        assert spiked_distribution(8, 3).max_mass() == Fraction(1, 8)

    def test_distance_to_uniform(self):
        d = spiked_distribution(8, 3).variational_from_uniform()
        assert d == Fraction(1, 8) - Fraction(1, 256)
        assert float(d) == 0.12109375

    def test_total_mass_exact_up_to_cap(self):
        for n, l in [(1, 0), (8, 3), (16, 8), (30, 20), (30, 30)]:
            assert spiked_distribution(n, l).total_mass() == 1

    def test_full_exponent_reduces_to_uniform(self):
        d = spiked_distribution(8, 8)
        assert d.variational_from_uniform() == 0
        assert d.spike_mass == d.rest_mass

    def test_dense_expansion_matches_sparse(self):
        d = spiked_distribution(6, 2)
        dense = d.to_probdist()
        assert dense.mass(d.spike_label) == d.spike_mass
        assert sum(dense.probs) == 1

    def test_entropy_matches_dense_sum(self):
        d = spiked_distribution(8, 3)
        dense_h = -sum(
            float(p) * math.log2(float(p)) for p in d.to_probdist().probs if p > 0
        )
        assert d.shannon_entropy() == pytest.approx(dense_h, abs=1e-12)
        assert spiked_distribution(8, 0).shannon_entropy() == 0.0  # point mass
        assert spiked_distribution(8, 8).shannon_entropy() == pytest.approx(8.0, abs=1e-12)

    def test_bad_params(self):
        with pytest.raises(BadParams):
            spiked_distribution(8, 9)
        with pytest.raises(BadParams):
            spiked_distribution(31, 3)
        with pytest.raises(TooLarge):
            spiked_distribution(30, 2).to_probdist()


class TestConditionOnLeak:
    def test_two_bit_first_bit_leak(self):
        rng = np.random.default_rng(6)
        sigma, rho1, rho2 = (random_density(rng, 2) for _ in range(3))
        e = two_bit_pkl_example(sigma, rho1, rho2)
        conditioned = condition_on_leak(e, LeakSpec((0,), (0,)))
        assert conditioned.n_bits == 1
        assert conditioned.prior.probs == (Fraction(1, 2), Fraction(1, 2))
        np.testing.assert_array_equal(conditioned.probe("0").matrix, e.probe("00").matrix)
        np.testing.assert_array_equal(conditioned.probe("1").matrix, e.probe("01").matrix)

    def test_leak_nothing_is_identity(self):
        rng = np.random.default_rng(7)
        e = random_ensemble(rng, 2, 2)
        conditioned = condition_on_leak(e, LeakSpec((), ()))
        assert conditioned.keys == e.keys
        assert [float(p) for p in conditioned.prior.probs] == [
            float(p) for p in e.prior.probs
        ]

    def test_leak_all_bits(self):
        rng = np.random.default_rng(8)
        e = random_ensemble(rng, 2, 2)
        conditioned = condition_on_leak(e, LeakSpec((0, 1), (1, 0)))
        assert conditioned.n_bits == 0
        assert conditioned.keys == ("",)
        np.testing.assert_array_equal(conditioned.probe("").matrix, e.probe("10").matrix)

    def test_zero_mass_pattern(self):
        rng = np.random.default_rng(9)
        probes = {k: random_density(rng, 2) for k in bit_strings(1)}
        e = CqEnsemble(1, ProbDist(bit_strings(1), (1.0, 0.0)), probes)
        with pytest.raises(ZeroMass):
            condition_on_leak(e, LeakSpec((0,), (1,)))

    def test_conditional_average_identity(self):
        # conditioning then averaging equals the direct conditional average
        rng = np.random.default_rng(10)
        for _ in range(10):
            e = random_ensemble(rng, 3, 2, uniform_prior=False)
            leak = LeakSpec((0, 2), (1, 0))
            conditioned = condition_on_leak(e, leak)
            direct = np.zeros((2, 2), dtype=complex)
            total = 0.0
            for k, p in zip(e.keys, e.prior.probs):
                if k[0] == "1" and k[2] == "0":
                    direct += float(p) * e.probe(k).matrix
                    total += float(p)
            np.testing.assert_allclose(
                average_probe(conditioned).matrix, direct / total, atol=1e-12
            )

    def test_position_out_of_range(self):
        rng = np.random.default_rng(11)
        e = random_ensemble(rng, 2, 2)
        with pytest.raises(BadParams):
            condition_on_leak(e, LeakSpec((5,), (0,)))


class TestLeakSpec:
    def test_positions_must_increase(self):
        with pytest.raises(BadParams):
            LeakSpec((1, 0), (0, 0))

    def test_values_must_be_bits(self):
        with pytest.raises(BadParams):
            LeakSpec((0,), (2,))


class TestSerialization:
    def test_round_trip(self):
        rng = np.random.default_rng(12)
        e = random_ensemble(rng, 2, 3)
        back = ensemble_from_json(ensemble_to_json(e))
        assert back.keys == e.keys
        for k in e.keys:
            np.testing.assert_allclose(back.probe(k).matrix, e.probe(k).matrix, atol=1e-15)

    def test_ensemble_key_validation(self):
        with pytest.raises(BadParams):
            CqEnsemble(
                1,
                ProbDist(("1", "0"), (0.5, 0.5)),  # wrong order
                {"0": validate_density(np.eye(2) / 2), "1": validate_density(np.eye(2) / 2)},
            )
