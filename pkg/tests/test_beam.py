import numpy as np
import pytest

from recfosm.beam import BeamParams, tip_deflection, tip_deflection_model
from recfosm.distributions import from_mean_cov
from recfosm.errors import ConfigurationError, ParameterDomainError
from recfosm.inputs import RandomInput
from recfosm.numerics import finite_diff
from recfosm.propagation import fosm, monte_carlo, rec_fosm
from recfosm.reciprocal import reciprocal_moments_for

W0 = 7.054673721340388


class TestTipDeflection:
    def test_nominal(self):
        assert tip_deflection(BeamParams()) == pytest.approx(7.0547, abs=1e-3)
        assert tip_deflection(BeamParams()) == pytest.approx(W0, rel=1e-15)

    def test_modulus_doubled(self):
        assert tip_deflection(BeamParams(E=140)) == tip_deflection(BeamParams()) / 2

    def test_height_doubled(self):
        assert tip_deflection(BeamParams(h=60)) == tip_deflection(BeamParams()) / 8

    @pytest.mark.parametrize("field", ["F", "L", "E", "h", "b"])
    def test_positive(self, field):
        with pytest.raises(ParameterDomainError):
            BeamParams(**{field: 0.0})

    def test_from_mapping_unknown(self):
        with pytest.raises(ConfigurationError):
            BeamParams.from_mapping({"I": 1.0})


class TestModel:
    def test_gradient_e(self):
        m = tip_deflection_model(BeamParams(), ["E"])
        assert m.gradient(np.array([70.0]))[0] == pytest.approx(-0.10078, abs=1e-5)

    def test_hessian_h(self):
        m = tip_deflection_model(BeamParams(), ["h"])
        assert m.hessian_diag(np.array([30.0]))[0] == pytest.approx(12 * W0 / 900, abs=1e-5)
        assert m.hessian_diag(np.array([30.0]))[0] == pytest.approx(0.09406, abs=1e-5)

    def test_gradient_vs_fd(self):
        m = tip_deflection_model(BeamParams(), ["E", "h"])
        rng = np.random.default_rng(0)
        for x in rng.uniform([20, 10], [140, 60], (20, 2)):
            np.testing.assert_allclose(m.gradient(x), finite_diff(m.value, x), rtol=1e-5)
            np.testing.assert_allclose(m.hessian_diag(x), finite_diff(m.value, x, "hessian_diag"), rtol=1e-5)

    def test_all_parameters(self):
        m = tip_deflection_model(BeamParams(), ["F", "L", "E", "h", "b"])
        x = np.array([0.1, 1000, 70, 30, 30])
        np.testing.assert_allclose(m.gradient(x), finite_diff(m.value, x), rtol=1e-5)

    def test_batch_matches_scalar(self):
        m = tip_deflection_model(BeamParams(), ["E", "h"])
        pts = np.array([[70.0, 30.0], [50.0, 25.0]])
        np.testing.assert_allclose(m.values(pts), [m.value(p) for p in pts], rtol=1e-15)

    @pytest.mark.parametrize("names", [["G"], ["E", "E"], []])
    def test_bad_labels(self, names):
        with pytest.raises(ConfigurationError):
            tip_deflection_model(BeamParams(), names)

    def test_linear_in_reciprocal_modulus(self):
        m = tip_deflection_model(BeamParams(), ["E"])
        c = W0 * 70.0
        rng = np.random.default_rng(1)
        for z0, z in rng.uniform(1 / 200, 1 / 10, (50, 2)):
            resid = m.value(np.array([1 / z])) - m.value(np.array([1 / z0])) - c * (z - z0)
            assert abs(resid) < 1e-12 * max(1.0, c * z)

    @pytest.mark.parametrize("cov", [0.01, 0.05, 0.1])
    def test_height_recfosm_beats_fosm(self, cov):
        model = tip_deflection_model(BeamParams(), ["h"])
        inp = RandomInput.independent([from_mean_cov("Weibull", 30, cov)], ["h"])
        mc = monte_carlo(model, inp, 10**6, 0)
        err_fosm = abs(fosm(model, inp).mean - mc.mean)
        err_rec = abs(rec_fosm(model, reciprocal_moments_for(inp)).mean - mc.mean)
        assert err_rec < err_fosm
