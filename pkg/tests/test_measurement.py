import numpy as np
import pytest

from waylab.errors import DimensionMismatchError, InvalidMeasurementError, InvalidStateError, NotHermitianError
from waylab.explorer import random_commuting_kraus, random_density_matrix, random_hermitian, random_kraus
from waylab.measurement import (
    KrausMeasurement,
    ProjectiveMeasurement,
    check_conservation,
    commutation_defect,
    conservation_defect,
    expected_value,
    outcome_distribution,
    theorem1_check,
    unconditional_post_state,
    validate,
)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)
I2 = np.eye(2)
PLUS = np.full((2, 2), 0.5)
E1 = np.diag([1.0, 0.0])
COORD = ProjectiveMeasurement([np.diag([1.0, 0]), np.diag([0, 1.0])])
XBASIS = ProjectiveMeasurement([(I2 + SX) / 2, (I2 - SX) / 2])


class TestConstruction:
    def test_ragged(self):
        with pytest.raises(DimensionMismatchError):
            KrausMeasurement([I2, np.eye(3)])

    def test_empty(self):
        with pytest.raises(InvalidMeasurementError):
            KrausMeasurement([])

    def test_operators_read_only(self):
        m = KrausMeasurement([I2])
        with pytest.raises(ValueError):
            m.operators[0][0, 0] = 5


class TestValidate:
    def test_identity(self):
        v = validate(KrausMeasurement([I2]))
        assert v.passed
        assert v.check("completeness").defect == 0.0

    def test_sx_projectors(self):
        assert validate(XBASIS).passed

    def test_missing_outcome(self):
        v = validate(KrausMeasurement([np.diag([1.0, 0])]))
        assert not v.passed
        assert v.check("completeness").defect == pytest.approx(1.0, abs=1e-15)


class TestOutcomeDistribution:
    def test_maximally_mixed(self):
        out = outcome_distribution(COORD, I2 / 2)
        np.testing.assert_allclose(out.probabilities, [0.5, 0.5])
        np.testing.assert_allclose(out.conditional_states[0], np.diag([1.0, 0]))
        np.testing.assert_allclose(out.conditional_states[1], np.diag([0, 1.0]))

    def test_eigenstate(self):
        out = outcome_distribution(COORD, E1)
        np.testing.assert_allclose(out.probabilities, [1.0, 0.0])
        np.testing.assert_allclose(out.conditional_states[0], E1)
        assert out.conditional_states[1] is None

    def test_plus_state(self):
        np.testing.assert_allclose(outcome_distribution(COORD, PLUS).probabilities, [0.5, 0.5])

    def test_rejects_bad_state(self):
        with pytest.raises(InvalidStateError):
            outcome_distribution(COORD, np.diag([2.0, -1.0]))
        with pytest.raises(InvalidStateError):
            outcome_distribution(COORD, np.eye(2))

    def test_rejects_incomplete(self):
        with pytest.raises(InvalidMeasurementError):
            outcome_distribution(KrausMeasurement([E1]), E1)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            outcome_distribution(COORD, np.eye(3) / 3)


class TestPostState:
    def test_identity_channel(self):
        rho = random_density_matrix(3, 1)
        np.testing.assert_allclose(unconditional_post_state(KrausMeasurement([np.eye(3)]), rho), rho)

    def test_dephasing(self):
        np.testing.assert_allclose(unconditional_post_state(COORD, PLUS), I2 / 2)

    def test_sx_on_e1(self):
        np.testing.assert_allclose(unconditional_post_state(XBASIS, E1), I2 / 2)

    def test_weighted_average_of_conditionals(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            m = random_kraus(3, 3, rng)
            rho = random_density_matrix(3, rng)
            out = outcome_distribution(m, rho)
            if np.any(out.probabilities < 1e-8):
                continue
            mix = sum(p * s for p, s in zip(out.probabilities, out.conditional_states))
            np.testing.assert_allclose(unconditional_post_state(m, rho), mix, atol=1e-10)


class TestExpectedValue:
    def test_trace_normalization(self):
        assert expected_value(np.eye(3), random_density_matrix(3, 4)) == pytest.approx(1.0, abs=1e-12)

    def test_eigenstate(self):
        assert expected_value(SZ, E1) == 1.0

    def test_plus(self):
        assert expected_value(SZ, PLUS) == 0.0

    def test_non_hermitian(self):
        with pytest.raises(NotHermitianError):
            expected_value(np.array([[0, 1j], [1j, 0]]), PLUS)

    def test_linearity(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            h1, h2 = random_hermitian(4, rng), random_hermitian(4, rng)
            rho = random_density_matrix(4, rng)
            a, b = rng.standard_normal(2)
            lhs = expected_value(a * h1 + b * h2, rho)
            assert lhs == pytest.approx(a * expected_value(h1, rho) + b * expected_value(h2, rho), abs=1e-8)


class TestConservation:
    def test_identity_observable(self):
        d, norm = conservation_defect(random_kraus(3, 2, 0), np.eye(3))
        assert norm < 1e-14

    def test_sx_vs_sz(self):
        d, norm = conservation_defect(XBASIS, SZ)
        np.testing.assert_allclose(d, -SZ, atol=1e-15)
        assert norm == pytest.approx(np.sqrt(2), abs=1e-12)

    def test_commuting_diagonal(self):
        d, norm = conservation_defect(COORD, np.diag([3.0, 7.0]))
        assert norm == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            conservation_defect(COORD, np.eye(3))

    def test_check_conservation_verdict(self):
        v = check_conservation(XBASIS, SZ)
        assert not v.passed
        assert v.check("conservation").defect == pytest.approx(np.sqrt(2), abs=1e-12)
        assert v.witnesses[0][0] == "conservation_defect"

    def test_commuting_kraus_conserves(self):
        for seed in range(20):
            m, h = random_commuting_kraus(4, 3, seed)
            assert commutation_defect(m, h) < 1e-12
            assert check_conservation(m, h).passed

    def test_conserving_preserves_expectation(self):
        rng = np.random.default_rng(9)
        m, h = random_commuting_kraus(3, 2, rng)
        for _ in range(100):
            rho = random_density_matrix(3, rng)
            after = expected_value(h, unconditional_post_state(m, rho))
            assert abs(after - expected_value(h, rho)) <= 1e-8


class TestCommutationDefect:
    def test_diagonal(self):
        assert commutation_defect(COORD, np.diag([3.0, 7.0])) == 0.0

    def test_sx_projectors_vs_sz(self):
        assert commutation_defect(XBASIS, SZ) == pytest.approx(np.sqrt(2), abs=1e-12)

    def test_identity_measurement(self):
        assert commutation_defect(KrausMeasurement([np.eye(3)]), random_hermitian(3, 1)) == 0.0


class TestTheorem1Check:
    def test_sx_sz_nonconserving(self):
        v = theorem1_check(XBASIS, SZ)
        assert v.passed
        assert v.facts["conserves"] is False
        assert v.facts["conservation_defect"] > 1e-8 and v.facts["commutation_defect"] > 1e-8

    def test_commuting_diagonal(self):
        v = theorem1_check(COORD, np.diag([3.0, 7.0]))
        assert v.passed and v.facts["conserves"]
        assert v.facts["conservation_defect"] == 0.0 and v.facts["commutation_defect"] == 0.0

    def test_sx_sx(self):
        v = theorem1_check(XBASIS, SX)
        assert v.passed and v.facts["conserves"]

    def test_rejects_non_resolution(self):
        with pytest.raises(InvalidMeasurementError):
            theorem1_check(ProjectiveMeasurement([E1, E1]), SZ)
        with pytest.raises(InvalidMeasurementError):
            theorem1_check(KrausMeasurement([I2 / np.sqrt(2), I2 / np.sqrt(2)]), SZ)
