import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from ifc.core import (
    DomainError,
    InterferenceFunction,
    LogUniformSampler,
    check_contractivity,
    check_monotonicity,
    check_paracontraction,
    check_positivity,
    check_scalability,
    check_two_sided_contractivity,
    check_two_sided_scalability,
    dc_metric,
    existence_test,
    lipschitz_ratio,
    log_transform,
    standard_axioms,
)
from ifc.numkit import solve_linear_fixed_point
from ifc.zoo import affine_if, clamp_if, scalar_fixtures, ubpc_if, example4

FIX = scalar_fixtures()
M2 = np.array([[0.0, 0.25], [0.5, 0.0]])
N2 = np.array([1.0, 1.0])


def scalar(f, name="f", kind="unclassified"):
    return InterferenceFunction(1, f, name=name, kind=kind)


def rechecks(verdict, fn):
    """A failing verdict's witness must reproduce by direct evaluation."""
    w = verdict.counterexample
    ax = verdict.axiom
    if ax == "positivity":
        return np.any(fn(w["p"]) <= 0)
    if ax == "monotonicity":
        return np.any(fn(w["p"]) < fn(w["p'"]))
    if ax == "scalability":
        return np.any(w["alpha"] * fn(w["p"]) <= fn(w["alpha"] * w["p"]))
    if ax == "contractivity":
        return np.any(fn(w["p"] + w["eps"] * w["v"]) > fn(w["p"]) + w["c"] * w["eps"] * w["v"])
    if ax.startswith("paracontraction"):
        return w["d_out"] >= w["d_in"]
    raise AssertionError(ax)


class TestFunction:
    def test_shape_and_kind(self):
        fn = affine_if(M2, N2)
        assert fn([1, 1]).shape == (2,)
        assert fn.component(0, [1, 1]) == 1.25
        with pytest.raises(ValueError):
            InterferenceFunction(1, lambda p: p, kind="bogus")

    def test_with_certificate(self):
        fn = affine_if(M2, N2).with_certificate(0.5, [1, 1])
        assert fn.is_contractive and fn.modulus == 0.5
        assert not affine_if(M2, N2).is_contractive


class TestPositivity:
    def test_example1_passes(self):
        assert check_positivity(FIX["example1"])

    def test_identity_fails_at_zero(self):
        v = check_positivity(scalar(lambda p: p))
        assert not v and v.counterexample["p"][0] == 0.0

    def test_ubpc_passes(self):
        sc, params = example4()
        assert check_positivity(ubpc_if(sc, params), n_samples=1000)

    def test_evaluator_error_carries_sample(self):
        with pytest.raises(RuntimeError, match="p="):
            check_positivity(scalar(lambda p: 1 / 0))


class TestMonotonicity:
    def test_linear_passes(self):
        assert check_monotonicity(affine_if(M2, N2))

    def test_decreasing_fails_and_rechecks(self):
        fn = scalar(lambda p: 1 / (1 + p))
        v = check_monotonicity(fn)
        assert not v and rechecks(v, fn)


class TestScalability:
    def test_example3_fails_at_probe(self):
        fn = FIX["example3"]
        v = check_scalability(fn, probes=fn.meta["probes"]["scalability"])
        assert not v
        assert v.counterexample["p"][0] == 0.125 and v.counterexample["alpha"] == 2.0
        assert rechecks(v, fn)

    def test_example3_witness_by_hand(self):
        # 2 I(1/8) = 0.05125 < I(1/4) = 0.0725
        assert FIX["example3"]([0.125])[0] == pytest.approx(0.025625, rel=1e-15)
        assert 2 * FIX["example3"]([0.125])[0] < FIX["example3"]([0.25])[0]

    def test_linear_with_noise_passes(self):
        assert check_scalability(affine_if(M2, N2))

    def test_homogeneous_fails(self):
        v = check_scalability(scalar(lambda p: 2 * p))
        assert not v and rechecks(v, scalar(lambda p: 2 * p))


class TestContractivity:
    def test_example3(self):
        assert check_contractivity(FIX["example3"], [1.0], 0.5)

    def test_example1_fails_for_any_c(self):
        for c in (0.1, 0.5, 0.99):
            v = check_contractivity(FIX["example1"], [1.0], c)
            assert not v and rechecks(v, FIX["example1"])

    def test_example2_fails_near_fixed_point(self):
        fn = FIX["example2"]
        v = check_contractivity(fn, [1.0], 0.99, probes=fn.meta["probes"]["contractivity"])
        assert not v and rechecks(v, fn)
        assert v.counterexample["p"][0] == 2.0

    def test_certified_linear(self):
        v = np.array([1.0, 2.0])
        c = np.max(M2 @ v / v)
        assert check_contractivity(affine_if(M2, N2), v, c)
        assert not check_contractivity(affine_if(M2, N2), v, 0.9 * c)

    @given(st.integers(0, 10**6))
    def test_pass_implies_lipschitz(self, seed):
        rng = np.random.default_rng(seed)
        m = rng.uniform(0, 0.3, (3, 3))
        np.fill_diagonal(m, 0)
        fn = affine_if(m, np.ones(3))
        v = np.linalg.solve(np.eye(3) - m, np.ones(3))
        c = float(np.max(m @ v / v))
        assert check_contractivity(fn, v, c, n_samples=50, seed=seed)
        s = LogUniformSampler()
        for _ in range(50):
            p, q = s.powers(rng, 3), s.powers(rng, 3)
            assert lipschitz_ratio(fn, p, q, v) <= c * (1 + 1e-12)


class TestTwoSided:
    def test_standard_is_two_sided_scalable(self):
        for fn in (FIX["example1"], FIX["example2"], affine_if(M2, N2)):
            assert check_two_sided_scalability(fn), fn.name

    def test_ubpc_two_sided_scalable(self):
        assert check_two_sided_scalability(ubpc_if(*example4()))

    def test_homogeneous_fails(self):
        assert not check_two_sided_scalability(scalar(lambda p: 2 * p))

    def test_monotone_contractive_passes(self):
        v = np.array([1.0, 2.0])
        c = float(np.max(M2 @ v / v))
        assert check_two_sided_contractivity(affine_if(M2, N2), v, c)

    def test_example1_fails(self):
        assert not check_two_sided_contractivity(FIX["example1"], [1.0], 0.9)

    def test_clamped_linear_passes(self):
        v = np.array([1.0, 2.0])
        c = float(np.max(M2 @ v / v))
        fn = clamp_if(affine_if(M2, N2), [1.1, 1.1], [1.4, 1.6])
        assert check_two_sided_contractivity(fn, v, c)

    def test_non_monotone_contractive(self):
        # |I(p) - I(q)| <= 0.5 |p - q| but I decreases: two-sided only
        fn = scalar(lambda p: 2.0 - 0.5 * np.tanh(p))
        assert check_two_sided_contractivity(fn, [1.0], 0.5)
        assert not check_monotonicity(fn)


class TestParacontraction:
    @pytest.mark.parametrize("name", ["example1", "example2", "no-fixed-point"])
    def test_standard_fixtures_dc(self, name):
        fn = FIX[name]
        assert check_paracontraction(fn, "dc", fn.meta.get("sampler", LogUniformSampler()))

    def test_no_fixed_point_rounds_to_identity(self):
        # why that fixture samples a narrower range
        assert FIX["no-fixed-point"]([40.0])[0] == 40.0

    def test_example1_max_norm_fails(self):
        v = check_paracontraction(FIX["example1"], "max")
        assert not v
        assert v.counterexample["d_out"] == pytest.approx(2 * v.counterexample["d_in"])

    def test_homogeneous_not_strict(self):
        assert not check_paracontraction(scalar(lambda p: 2 * p), "dc")


class TestDcMetric:
    def test_examples(self):
        assert dc_metric([1, 2], [1, 2]) == 0.0
        assert dc_metric([np.e, 1], [1, 1]) == pytest.approx(1.0, rel=1e-15)

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            dc_metric([0, 1], [1, 1])

    vecs = arrays(np.float64, 3, elements=st.floats(1e-6, 1e6))

    @given(vecs, vecs, vecs)
    def test_metric_axioms(self, p, q, r):
        assert dc_metric(p, q) == dc_metric(q, p)
        assert dc_metric(p, r) <= dc_metric(p, q) + dc_metric(q, r) + 1e-12

    @given(vecs, vecs, st.floats(1e-3, 1e3))
    def test_scale_invariant(self, p, q, a):
        assert dc_metric(a * p, a * q) == pytest.approx(dc_metric(p, q), abs=1e-9)


class TestLogTransform:
    def test_constant(self):
        fn = log_transform(scalar(lambda p: np.array([3.0])))
        assert fn([-5.0])[0] == pytest.approx(np.log(3.0))

    def test_domain_error(self):
        fn = log_transform(scalar(lambda p: p - 1.0))
        with pytest.raises(DomainError) as info:
            fn([0.0])
        assert info.value.witness[0] == 1.0

    @given(arrays(np.float64, 2, elements=st.floats(1e-6, 1e6)))
    def test_round_trip(self, p):
        base = affine_if(M2, N2)
        assert np.allclose(np.exp(log_transform(base)(np.log(p))), base(p), rtol=1e-12)


class TestExistence:
    def test_linear(self):
        fn = affine_if(M2, N2)
        p_star = solve_linear_fixed_point(M2, N2)
        assert existence_test(fn, 2 * p_star)
        assert not existence_test(fn, 0.5 * p_star)

    def test_at_fixed_point(self):
        assert existence_test(FIX["example2"], [2.0])

    @pytest.mark.parametrize("p", [1e-3, 1.0, 10.0, 30.0])
    def test_no_fixed_point(self, p):
        assert not existence_test(FIX["no-fixed-point"], [p])


def test_standard_axioms_bundle():
    assert all(standard_axioms(affine_if(M2, N2), n_samples=200))
    assert not all(standard_axioms(FIX["example3"], n_samples=200))


def test_verdict_line_format():
    v = check_positivity(scalar(lambda p: p))
    line = str(v)
    assert line.startswith("positivity") and "FAIL" in line and "witness" in line
