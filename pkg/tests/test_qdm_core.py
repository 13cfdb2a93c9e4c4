import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from qmarkov.errors import DomainError, InvalidStateError, SupportCollisionError
from qmarkov.generators import ghz_state, random_state
from qmarkov.qdm_core import (
    LocalState,
    align,
    basis_state,
    cmi,
    entropy,
    fidelity,
    maximally_mixed,
    partial_trace,
    pure_state,
    reduce_to,
    sanitize,
    spectral_decomposition,
    spectral_transform,
    tensor,
    trace_distance,
)


def diag_state(values, support=(1,)):
    return LocalState(support, (len(values),), np.diag(values))


class TestTensor:
    def test_product_basis_state(self):
        zero = basis_state([0], (1,), (2,))
        one = basis_state([1], (2,), (2,))
        product = tensor(zero, one)
        assert product.support == (1, 2)
        assert_allclose(product.matrix, basis_state([0, 1], (1, 2), (2, 2)).matrix, atol=1e-15)

    def test_result_is_canonical(self):
        product = tensor(maximally_mixed((3,), (2,)), maximally_mixed((1,), (2,)))
        assert product.support == (1, 3)
        assert_allclose(product.matrix, np.eye(4) / 4, atol=1e-15)

    def test_round_trip_through_partial_trace(self, rng):
        a = random_state((1, 2), (2, 3), rng)
        b = random_state((5,), (2,), rng)
        assert trace_distance(partial_trace(tensor(a, b), (5,)), a) <= 1e-12

    def test_overlapping_supports(self):
        with pytest.raises(SupportCollisionError):
            tensor(maximally_mixed((1, 2), (2, 2)), maximally_mixed((2,), (2,)))

    def test_kron_is_permuted_into_site_order(self, rng):
        a = random_state((4,), (2,), rng)
        b = random_state((1,), (3,), rng)
        product = tensor(a, b)
        assert product.dims == (3, 2)
        assert_allclose(product.matrix, np.kron(b.matrix, a.matrix), atol=1e-14)


class TestPartialTrace:
    def test_bell_pair(self):
        bell = pure_state(np.array([1, 0, 0, 1]), (1, 2), (2, 2))
        assert_allclose(partial_trace(bell, (2,)).matrix, np.eye(2) / 2, atol=1e-15)

    def test_product_factor(self, rng):
        a = random_state((1,), (2,), rng)
        b = random_state((2,), (3,), rng)
        assert_allclose(partial_trace(tensor(a, b), (1,)).matrix, b.matrix, atol=1e-14)

    def test_ghz3_drop_last(self):
        reduced = partial_trace(ghz_state((1, 2, 3), 2), (3,))
        expected = np.zeros((4, 4))
        expected[0, 0] = expected[3, 3] = 0.5
        assert_allclose(reduced.matrix, expected, atol=1e-15)

    def test_drop_outside_support(self):
        with pytest.raises(DomainError):
            partial_trace(maximally_mixed((1, 2), (2, 2)), (3,))

    def test_drop_everything(self):
        with pytest.raises(DomainError):
            partial_trace(maximally_mixed((1, 2), (2, 2)), (1, 2))

    def test_reduce_to_empty_is_scalar_trace(self):
        scalar = reduce_to(maximally_mixed((1, 2), (2, 2)), ())
        assert scalar.support == ()
        assert_allclose(scalar.matrix, [[1.0]])

    def test_traces_commute(self, rng):
        for _ in range(100):
            s = random_state((1, 2, 3, 4), (2, 2, 2, 2), rng)
            ab = partial_trace(partial_trace(s, (1,)), (3,))
            ba = partial_trace(partial_trace(s, (3,)), (1,))
            assert trace_distance(ab, ba) <= 1e-12


class TestAlign:
    def test_invariants_survive_reordering(self, rng):
        a = random_state((1, 2, 3), (2, 3, 2), rng)
        b = random_state((1, 2, 3), (2, 3, 2), rng)
        shuffled = align(a, (3, 1, 2))
        assert shuffled.support == (3, 1, 2)
        assert abs(entropy(shuffled) - entropy(a)) <= 1e-12
        assert abs(trace_distance(shuffled, b) - trace_distance(a, b)) <= 1e-12
        assert abs(fidelity(shuffled, b) - fidelity(a, b)) <= 1e-12

    def test_not_a_permutation(self):
        with pytest.raises(DomainError):
            align(maximally_mixed((1, 2), (2, 2)), (1, 3))


class TestSpectral:
    def test_sqrt(self):
        assert_allclose(spectral_transform(np.diag([4.0, 1.0]), np.sqrt), np.diag([2.0, 1.0]), atol=1e-14)

    def test_inverse_root_on_support_only(self):
        result = spectral_transform(np.diag([4.0, 0.0]), lambda x: x ** -0.5)
        assert_allclose(result, np.diag([0.5, 0.0]), atol=1e-14)

    def test_decomposition_invariants(self, rng):
        m = random_state((1, 2), (2, 3), rng).matrix
        spectrum = spectral_decomposition(m)
        assert np.all(np.diff(spectrum.eigenvalues) <= 0)
        assert np.max(np.abs(spectrum.reconstruct() - m)) <= 1e-10 * np.max(np.abs(m))
        u = spectrum.eigenvectors
        assert_allclose(u.conj().T @ u, np.eye(6), atol=1e-10)

    def test_non_hermitian_rejected(self):
        with pytest.raises(InvalidStateError):
            spectral_decomposition(np.array([[0.5, 1.0], [0.0, 0.5]]))


class TestEntropy:
    def test_pure_state(self):
        assert entropy(ghz_state((1, 2, 3), 2)) == pytest.approx(0.0, abs=1e-12)

    def test_maximally_mixed(self):
        assert entropy(maximally_mixed((1, 2), (2, 2))) == pytest.approx(math.log(4), abs=1e-12)

    def test_diagonal(self):
        assert entropy(diag_state([0.75, 0.25])) == pytest.approx(0.562335, abs=1e-6)

    def test_bits(self):
        assert entropy(maximally_mixed((1,), (2,)), base=2) == pytest.approx(1.0, abs=1e-12)

    def test_additive_on_products(self, rng):
        a = random_state((1,), (3,), rng)
        b = random_state((2, 3), (2, 2), rng)
        assert entropy(tensor(a, b)) == pytest.approx(entropy(a) + entropy(b), abs=1e-9)


class TestCMI:
    def test_product(self, rng):
        s = tensor(tensor(random_state((1,), (2,), rng), random_state((2,), (2,), rng)), random_state((3,), (2,), rng))
        assert abs(cmi(s, (1,), (2,), (3,))) <= 1e-12

    def test_ghz3(self):
        assert cmi(ghz_state((1, 2, 3), 2), (1,), (2,), (3,)) == pytest.approx(math.log(2), abs=1e-12)

    def test_ghz4_reduced(self):
        reduced = reduce_to(ghz_state((1, 2, 3, 4), 2), (1, 2, 3))
        assert cmi(reduced, (1,), (2,), (3,)) == pytest.approx(0.0, abs=1e-12)

    def test_empty_conditioning_is_mutual_information(self):
        bell = pure_state(np.array([1, 0, 0, 1]), (1, 2), (2, 2))
        assert cmi(bell, (1,), (), (2,)) == pytest.approx(2 * math.log(2), abs=1e-12)

    @pytest.mark.parametrize("dims", [(2, 2, 2), (2, 3, 2)])
    def test_strong_subadditivity(self, rng, dims):
        for _ in range(500):
            s = random_state((1, 2, 3), dims, rng)
            assert cmi(s, (1,), (2,), (3,)) >= -1e-10

    @pytest.mark.parametrize(
        "a, b, c",
        [
            ((1,), (1,), (2,)),
            ((), (2,), (3,)),
            ((1,), (2,), (4,)),
        ],
    )
    def test_bad_partitions(self, a, b, c):
        with pytest.raises(DomainError):
            cmi(maximally_mixed((1, 2, 3), (2, 2, 2)), a, b, c)


class TestDistances:
    def test_equal_states(self, rng):
        s = random_state((1, 2), (2, 2), rng)
        assert trace_distance(s, s) == pytest.approx(0.0, abs=1e-14)
        assert fidelity(s, s) == pytest.approx(1.0, abs=1e-10)

    def test_orthogonal_pure_states(self):
        zero, one = basis_state([0], (1,), (2,)), basis_state([1], (1,), (2,))
        assert trace_distance(zero, one) == pytest.approx(2.0, abs=1e-14)
        assert fidelity(zero, one) == pytest.approx(0.0, abs=1e-12)

    def test_pure_vs_mixed(self):
        zero = basis_state([0], (1,), (2,))
        mixed = maximally_mixed((1,), (2,))
        assert trace_distance(zero, mixed) == pytest.approx(1.0, abs=1e-14)
        assert fidelity(zero, mixed) == pytest.approx(1 / math.sqrt(2), abs=1e-6)

    def test_mismatched_supports(self):
        with pytest.raises(DomainError):
            trace_distance(maximally_mixed((1,), (2,)), maximally_mixed((2,), (2,)))

    def test_fidelity_sandwich(self, rng):
        for _ in range(50):
            a = random_state((1, 2), (2, 2), rng)
            b = random_state((1, 2), (2, 2), rng)
            f, d = fidelity(a, b), trace_distance(a, b)
            assert abs(fidelity(b, a) - f) <= 1e-10
            assert 2 * (1 - f) <= d + 1e-9
            assert d <= 2 * math.sqrt(1 - f ** 2) + 1e-9


class TestSanitize:
    def test_valid_state_unchanged(self, rng):
        s = random_state((1, 2), (2, 2), rng)
        repaired = sanitize(s.matrix, s.support, s.dims)
        assert np.max(np.abs(repaired.matrix - s.matrix)) <= 1e-12

    def test_clip_and_renormalize(self):
        repaired = sanitize(np.diag([1 + 1e-10, -1e-10]), (1,), (2,))
        assert_allclose(repaired.matrix, np.diag([1.0, 0.0]), atol=1e-15)

    def test_trace_violation(self):
        with pytest.raises(InvalidStateError):
            sanitize(np.diag([0.6, 0.5]), (1,), (2,))

    def test_non_finite(self):
        with pytest.raises(InvalidStateError):
            sanitize(np.diag([np.nan, 1.0]), (1,), (2,))

    def test_check_valid(self):
        with pytest.raises(InvalidStateError):
            diag_state([0.6, 0.5]).check_valid()
