import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ifc.certify import (
    CertificationError,
    assignment_matrix,
    certify_by_enumeration,
    certify_common_v,
    certify_drpc,
    certify_linear,
    certify_linear_rowsum,
    certify_macro,
    certify_mpa,
    certify_ubpc,
    convergence_steps_bound,
    convergence_time_bound,
    enumerate_assignment_spectra,
)
from ifc.core import check_contractivity
from ifc.numkit import weighted_max_norm_mat
from ifc.zoo import (
    IntervalUncertainty,
    NetworkScenario,
    UbpcParams,
    build_normalized,
    drpc_if,
    example4,
    macro_overestimate_if,
    min_power_if,
    random_scenario,
    ubpc_if,
)

from strategies import stable_matrix

GOLDEN_C = 0.6890036420241056
GOLDEN_RHO_MB = 0.35772533656649663


def eig_rho(a):
    return float(max(abs(np.linalg.eigvals(a))))


class TestLinear:
    def test_swap(self):
        cert = certify_linear([[0, 0.5], [0.5, 0]])
        assert cert.modulus == pytest.approx(0.5)
        assert cert.verify()

    def test_infeasible_reports_rho(self):
        with pytest.raises(CertificationError) as info:
            certify_linear([[0, 2.0], [2.0, 0]])
        assert info.value.reason == "spectral-radius>=1"
        assert info.value.witness["rho"] == pytest.approx(2.0)

    def test_single_user_zero_modulus(self):
        cert = certify_linear([[0.0]])
        assert cert.modulus == 0.0 and cert.weights.tolist() == [1.0]

    def test_rowsum_conservative(self):
        m = np.array([[0.0, 1.5], [0.1, 0.0]])
        assert certify_linear(m).modulus < 1
        with pytest.raises(CertificationError, match="row-sum"):
            certify_linear_rowsum(m)

    @given(stable_matrix(max_k=8))
    def test_modulus_between_rho_and_one(self, m):
        cert = certify_linear(m)
        assert cert.verify()
        assert eig_rho(m) <= cert.modulus * (1 + 1e-9) + 1e-12
        assert cert.modulus < 1

    def test_float_floor_refuses(self):
        # rho = 0.5, but (I - M)^-1 1 reaches 1e18 and c = 1 - 1/max(v) rounds to 1
        m = np.zeros((2, 2))
        m[0, 1], m[1, 0] = 5.42101086e-20, 4.61168602e18
        with pytest.raises(CertificationError):
            certify_linear(m)

    def test_to_dict_is_json_ready(self):
        import json
        json.dumps(certify_linear([[0, 0.5], [0.5, 0]]).to_dict())


class TestUbpc:
    def test_golden(self):
        sc, params = example4()
        cert = certify_ubpc(sc, params)
        assert cert.modulus == pytest.approx(GOLDEN_C, rel=1e-12)
        assert cert.details["rho_Mb"] == pytest.approx(GOLDEN_RHO_MB, rel=1e-10)
        assert cert.verify()

    def test_golden_oracle(self):
        # independent route: numpy solve for v, norm by explicit loop
        sc, params = example4()
        g = sc.gains
        gamma = sc.targets
        a = params.a
        b = gamma - np.log(a * gamma - 1) / a
        m_b = np.array([[0.0 if i == j else b[i] * gamma[i] * g[i, j] / g[i, i] for j in range(4)]
                        for i in range(4)])
        v = np.linalg.solve(np.eye(4) - m_b, np.ones(4))
        c = max(sum(m_b[i, j] * v[j] for j in range(4)) / v[i] for i in range(4))
        assert c == pytest.approx(GOLDEN_C, rel=1e-12)
        assert eig_rho(m_b) == pytest.approx(GOLDEN_RHO_MB, rel=1e-12)

    def test_certificate_holds_on_function(self):
        sc, params = example4()
        cert = certify_ubpc(sc, params)
        assert check_contractivity(ubpc_if(sc, params), cert.weights, cert.modulus, n_samples=1000)

    def test_parameter_domain(self):
        sc = NetworkScenario([[1.0, 0.1], [0.1, 1.0]], [1.0, 1.0], [4.0, 4.0], assignment=[0, 1])
        with pytest.raises(CertificationError) as info:
            certify_ubpc(sc, UbpcParams([1.0, 1.0], [0.01, 0.01]))
        assert info.value.reason == "parameter-domain"


class TestCommonV:
    def test_single_matrix_agrees_with_linear(self):
        m = np.array([[0.0, 0.3, 0.1], [0.2, 0.0, 0.4], [0.5, 0.1, 0.0]])
        cert = certify_common_v([m])
        assert cert.modulus < 1 and cert.verify()

    def test_diverges_when_mixed_assignment_unstable(self):
        # each matrix alone is nilpotent but row-mixing gives rho = 1.2
        m1 = np.array([[0.0, 1.2], [0.0, 0.0]])
        m2 = np.array([[0.0, 0.0], [1.2, 0.0]])
        assert eig_rho(assignment_matrix([m1, m2], [0, 1])) == pytest.approx(1.2)
        with pytest.raises(CertificationError) as info:
            certify_common_v([m1, m2])
        assert info.value.reason == "common-v-diverged"

    @given(st.integers(0, 2**32 - 1))
    def test_certificate_covers_every_assignment(self, seed):
        rng = np.random.default_rng(seed)
        ms = rng.uniform(0, 0.4, (2, 3, 3))
        ms[:, range(3), range(3)] = 0
        try:
            cert = certify_common_v(ms)
        except CertificationError:
            return
        for l in np.ndindex(2, 2, 2):
            assert weighted_max_norm_mat(assignment_matrix(ms, l), cert.weights) <= cert.modulus * (1 + 1e-12)

    def test_mpa_certificate_holds_on_function(self):
        g = np.array([[0.9, 0.7, 0.8], [0.5, 0.6, 0.55]])
        sc = NetworkScenario(g, [0.1, 0.2], 10 ** (np.array([-6, -6, -5]) / 10))
        cert = certify_mpa(sc)
        assert check_contractivity(min_power_if(sc), cert.weights, cert.modulus, n_samples=500)

    def test_macro_overestimate(self):
        g = np.array([[0.9, 0.7, 0.8], [0.5, 0.6, 0.55]])
        sc = NetworkScenario(g, [0.1, 0.2], 10 ** (np.array([-6, -6, -5]) / 10))
        cert = certify_macro(sc)
        assert cert.details["rowsum_condition"] in (True, False)
        assert check_contractivity(macro_overestimate_if(sc), cert.weights, cert.modulus, n_samples=500)
        if cert.details["rowsum_condition"]:
            assert cert.details["rowsum_norm"] < 1


class TestEnumeration:
    def test_order_and_count(self):
        ms = np.zeros((3, 2, 2))
        spectra = enumerate_assignment_spectra(ms)
        assert [l for l, _ in spectra] == [(a, b) for a in range(3) for b in range(3)]

    def test_assignment_matrix_rows(self):
        ms = np.arange(18, dtype=float).reshape(2, 3, 3)
        m = assignment_matrix(ms, [1, 0, 1])
        assert np.array_equal(m, np.stack([ms[1, 0], ms[0, 1], ms[1, 2]]))

    def test_cap(self):
        with pytest.raises(ValueError, match="cap"):
            enumerate_assignment_spectra(np.zeros((3, 5, 5)), cap=100)

    def test_by_enumeration(self):
        sc = random_scenario(np.random.default_rng(0), 3, 2, cross=0.01)
        nm = build_normalized(sc)
        try:
            cert = certify_by_enumeration(nm.per_base)
        except CertificationError as exc:
            assert exc.reason == "enumeration-found-bad-assignment"
        else:
            assert cert.details["max_assignment_rho"] < 1


class TestDrpc:
    def test_upper_bound_certificate(self):
        lo = np.array([[0.0, 0.1], [0.1, 0.0]])
        hi = np.array([[0.0, 0.6], [0.5, 0.0]])
        unc = IntervalUncertainty(lo, hi)
        cert = certify_drpc(unc)
        v = np.linalg.solve(np.eye(2) - hi, np.ones(2))
        assert cert.modulus == pytest.approx(np.max(hi @ v / v), rel=1e-12)
        assert cert.details["rho"] == pytest.approx(math.sqrt(0.3), rel=1e-9)
        assert check_contractivity(drpc_if([1.0, 1.0], unc), cert.weights, cert.modulus, n_samples=500)

    def test_infeasible_upper(self):
        unc = IntervalUncertainty(np.zeros((2, 2)), np.array([[0.0, 2.0], [1.0, 0.0]]))
        with pytest.raises(CertificationError):
            certify_drpc(unc)


class TestTimeBound:
    def test_formula(self):
        assert convergence_time_bound(0.5, 1.0, 2**-10) == pytest.approx(10.0)
        assert convergence_time_bound(0.5, 1.0, 2**-10, delay=3) == pytest.approx(40.0)

    def test_edges(self):
        assert convergence_time_bound(0.0, 1.0, 0.5) == 0.0
        assert convergence_steps_bound(0.0, 1.0, 0.5) == 1
        assert convergence_steps_bound(0.5, 1.0, 0.3) == 2
        with pytest.raises(ValueError):
            convergence_time_bound(1.0, 1.0, 0.5)
        with pytest.raises(ValueError):
            convergence_time_bound(0.5, 1.0, 2.0)

    @given(st.floats(1e-3, 0.999), st.floats(1e-12, 0.99), st.integers(0, 10))
    def test_steps_bound_is_first_envelope_crossing(self, c, frac, d):
        n = convergence_steps_bound(c, 1.0, frac, d)
        cbar = c ** (1 / (d + 1))
        assert cbar**n <= frac * (1 + 1e-9)
        if n > 1:
            assert cbar ** (n - 1) > frac * (1 - 1e-9)
