import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import trapezoid

from qmarkov.certify import classical_markov_triple
from qmarkov.errors import DomainError, ExtensionDomainError
from qmarkov.generators import random_state
from qmarkov.models import RecoveryConfig
from qmarkov.qdm_core import cmi, reduce_to, scalar_state, tensor, trace_distance
from qmarkov.recovery import (
    apply_recovery,
    beta0,
    build_recovery,
    quadrature,
    recover,
    recovery_fidelity_gap,
    recovery_trace_gap,
)

AVERAGED = RecoveryConfig.parse("averaged:201,10")


class TestQuadrature:
    def test_petz_is_single_angle(self):
        angles, weights = quadrature(RecoveryConfig())
        assert angles.tolist() == [0.0]
        assert weights.tolist() == [1.0]

    def test_averaged_weights(self):
        angles, weights = quadrature(AVERAGED)
        assert len(angles) == 201
        assert angles[0] == -10.0 and angles[-1] == 10.0
        assert weights.sum() == pytest.approx(1.0, abs=1e-14)
        assert_allclose(weights, weights[::-1], atol=1e-14)

    def test_density_integrates_to_one(self):
        t = np.linspace(-40, 40, 200001)
        assert trapezoid(beta0(t), t) == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("text", ["averaged:200,10", "averaged:1,10", "averaged:201,0", "bogus"])
    def test_invalid_configs(self, text):
        with pytest.raises(ValueError):
            RecoveryConfig.parse(text)

    @pytest.mark.parametrize("text", ["petz", "rotated:0.25", "averaged:201,10"])
    def test_label_round_trip(self, text):
        assert RecoveryConfig.parse(text).label() == text


class TestBuildRecovery:
    def test_product_base_appends_rho_c(self, rng):
        rho_b = random_state((1,), (2,), rng)
        rho_c = random_state((2,), (3,), rng)
        recovery = build_recovery(tensor(rho_b, rho_c), (1,), (2,))
        for _ in range(20):
            x = random_state((1,), (2,), rng)
            assert trace_distance(apply_recovery(recovery, x), tensor(x, rho_c)) <= 1e-10

    def test_identity_off_conditioning_sites(self, rng):
        rho_c = random_state((2,), (2,), rng)
        recovery = build_recovery(tensor(random_state((1,), (2,), rng), rho_c), (1,), (2,))
        state = random_state((1, 4), (2, 2), rng)
        assert trace_distance(apply_recovery(recovery, state), tensor(state, rho_c)) <= 1e-10

    def test_empty_conditioning(self, rng):
        rho_c = random_state((3,), (2,), rng)
        recovery = build_recovery(rho_c, (), (3,))
        assert trace_distance(apply_recovery(recovery, scalar_state()), rho_c) <= 1e-12

    @pytest.mark.parametrize("cfg", [RecoveryConfig(), RecoveryConfig.parse("rotated:0.3"), AVERAGED])
    def test_defining_property(self, rng, cfg):
        rho_bc = random_state((1, 2), (2, 2), rng)
        recovery = build_recovery(rho_bc, (1,), (2,), cfg)
        assert trace_distance(apply_recovery(recovery, reduce_to(rho_bc, (1,))), rho_bc) <= 1e-10

    @pytest.mark.parametrize("cfg", [RecoveryConfig(), RecoveryConfig.parse("rotated:-1.5"), AVERAGED])
    def test_cptp(self, rng, cfg):
        for _ in range(5):
            recovery = build_recovery(random_state((1, 2), (2, 2), rng), (1,), (2,), cfg)
            negativity, deviation = recovery.cptp_deviation()
            assert negativity <= 1e-10
            assert deviation <= 1e-10

    def test_cptp_on_rank_deficient_base(self, rng):
        recovery = build_recovery(random_state((1, 2), (2, 2), rng, rank=1), (1,), (2,))
        negativity, deviation = recovery.cptp_deviation()
        assert negativity <= 1e-10
        assert deviation <= 1e-10

    def test_rotated_zero_matches_petz_bitwise(self, rng):
        rho_bc = random_state((1, 2), (2, 2), rng)
        x = random_state((1, 3), (2, 2), rng)
        petz = apply_recovery(build_recovery(rho_bc, (1,), (2,), RecoveryConfig()), x)
        rotated = apply_recovery(build_recovery(rho_bc, (1,), (2,), RecoveryConfig(kind="rotated", t=0.0)), x)
        assert np.array_equal(petz.matrix, rotated.matrix)

    def test_norm_nonincrease(self, rng):
        recovery = build_recovery(random_state((1, 2), (2, 2), rng), (1,), (2,))
        for _ in range(50):
            x, y = random_state((1,), (2,), rng), random_state((1,), (2,), rng)
            shrunk = trace_distance(apply_recovery(recovery, x), apply_recovery(recovery, y))
            assert shrunk <= trace_distance(x, y) + 1e-9

    def test_target_must_be_nonempty(self, rng):
        with pytest.raises(DomainError):
            build_recovery(random_state((1,), (2,), rng), (1,), ())

    def test_partition_mismatch(self, rng):
        with pytest.raises(DomainError):
            build_recovery(random_state((1, 2), (2, 2), rng), (1,), (3,))


class TestApplyRecovery:
    def test_missing_conditioning_sites(self, rng):
        recovery = build_recovery(random_state((1, 2), (2, 2), rng), (1,), (2,))
        with pytest.raises(ExtensionDomainError):
            apply_recovery(recovery, random_state((3,), (2,), rng))

    def test_target_already_present(self, rng):
        recovery = build_recovery(random_state((1, 2), (2, 2), rng), (1,), (2,))
        with pytest.raises(ExtensionDomainError):
            apply_recovery(recovery, random_state((1, 2), (2, 2), rng))

    def test_ghz_marginal_extension(self, ghz_chain):
        global_state, ms = ghz_chain
        first = ms.entries[0]
        recovery = build_recovery(reduce_to(ms.entries[1], (4, 5, 6)), (4,), (5, 6))
        grown = apply_recovery(recovery, first)
        assert grown.support == (1, 2, 3, 4, 5, 6)
        assert trace_distance(grown, reduce_to(global_state, range(1, 7))) <= 1e-8


class TestTheoremPair:
    def test_product_state(self, rng):
        s = tensor(tensor(random_state((1,), (2,), rng), random_state((2,), (2,), rng)), random_state((3,), (2,), rng))
        bound_lhs, information = recovery_fidelity_gap(s, (1,), (2,), (3,))
        assert bound_lhs <= 1e-10
        assert abs(information) <= 1e-10

    def test_classical_markov_chain(self, rng):
        s = classical_markov_triple((2, 2, 2), rng)
        bound_lhs, information = recovery_fidelity_gap(s, (1,), (2,), (3,))
        assert bound_lhs <= 1e-8
        assert information <= 1e-12
        assert recovery_trace_gap(s, (1,), (2,), (3,)) <= 1e-10

    def test_exact_recovery_on_generated_chain(self, classical_chain):
        global_state, _ = classical_chain
        s = reduce_to(global_state, range(1, 7))
        assert cmi(s, (1, 2), (3, 4), (5, 6)) <= 1e-12
        assert trace_distance(recover(s, (1, 2), (3, 4), (5, 6)), s) <= 1e-7

    def test_bits(self, rng):
        s = random_state((1, 2, 3), (2, 2, 2), rng)
        _, nats = recovery_fidelity_gap(s, (1,), (2,), (3,))
        _, bits = recovery_fidelity_gap(s, (1,), (2,), (3,), base=2)
        assert bits == pytest.approx(nats / math.log(2), rel=1e-10)

    def test_bad_partition(self, rng):
        with pytest.raises(DomainError):
            recovery_fidelity_gap(random_state((1, 2, 3), (2, 2, 2), rng), (1,), (2,), ())

    @pytest.mark.slow
    def test_averaged_map_bound(self, rng):
        for _ in range(100):
            s = random_state((1, 2, 3), (2, 2, 2), rng)
            bound_lhs, information = recovery_fidelity_gap(s, (1,), (2,), (3,), AVERAGED)
            assert bound_lhs <= information + 1e-6
