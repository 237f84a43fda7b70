import numpy as np
import pytest

from binmf import HyperParams, ModelKind, RunConfig, default_betadir, default_dirdir
from binmf.config import default_dirbeta, load_config_file, save_config_file


class TestDefaults:
    def test_betadir_nonparametric_k100(self):
        h = default_betadir(100, nonparametric=True)
        assert np.all(h.alpha == 1.0) and np.all(h.beta == 1.0)
        assert np.all(h.gamma == 0.01)
        assert h.nonparametric

    def test_betadir_parametric_flat(self):
        # the collapsed flat-prior configuration: every parameter 1
        h = default_betadir(5, nonparametric=False)
        assert np.all(h.alpha == 1.0) and np.all(h.beta == 1.0)
        assert np.all(h.gamma == 1.0)
        assert not h.nonparametric

    def test_betadir_k1(self):
        h = default_betadir(1, nonparametric=False)
        assert h.gamma.tolist() == [1.0]

    def test_dirdir_nonparametric_k100(self):
        h = default_dirdir(100, nonparametric=True)
        assert np.all(h.gamma == 0.01)
        assert np.all(h.eta == 1.0)

    def test_dirdir_parametric_k2(self):
        h = default_dirdir(2, nonparametric=False)
        assert h.gamma.tolist() == [1.0, 1.0]
        assert h.eta.tolist() == [1.0, 1.0]

    @pytest.mark.parametrize("factory", [default_betadir, default_dirdir, default_dirbeta])
    def test_k0_rejected(self, factory):
        with pytest.raises(ValueError):
            factory(0, nonparametric=False)

    @pytest.mark.parametrize("k", [1, 3, 7, 100, 1000])
    def test_nonparametric_gamma_total(self, k):
        h = default_betadir(k, nonparametric=True)
        assert abs(h.gamma.sum() - 1.0) <= 1e-12


class TestHyperParams:
    def test_positivity_enforced(self):
        with pytest.raises(ValueError):
            HyperParams(k_max=2, alpha=[1.0, 0.0], beta=1.0, gamma=1.0)
        with pytest.raises(ValueError):
            HyperParams(k_max=2, alpha=1.0, beta=-1.0, gamma=1.0)
        with pytest.raises(ValueError):
            HyperParams(k_max=2, gamma=np.nan, eta=1.0)

    def test_nonparametric_requires_flat_gamma(self):
        with pytest.raises(ValueError):
            HyperParams(k_max=2, gamma=[0.3, 0.7], eta=1.0, nonparametric=True)
        HyperParams(k_max=2, gamma=[0.5, 0.5], eta=1.0, nonparametric=True)

    def test_scalar_broadcast(self):
        h = HyperParams(k_max=3, alpha=2.0, beta=0.5, gamma=1.0)
        assert h.alpha.shape == (3,)
        assert h.alpha.tolist() == [2.0, 2.0, 2.0]

    def test_vectors_frozen(self):
        h = default_betadir(3, False)
        with pytest.raises(ValueError):
            h.gamma[0] = 5.0

    def test_require(self):
        h = default_betadir(2, False)
        h.require("alpha", "beta", "gamma")
        with pytest.raises(ValueError):
            h.require("eta")


class TestRunConfig:
    def test_defaults_match_reference_protocol(self):
        cfg = RunConfig()
        assert cfg.burn_in == 4000
        assert cfg.kept_samples == 1000
        assert cfg.vb_iterations == 500
        assert cfg.thin == 1

    @pytest.mark.parametrize("kwargs", [
        {"burn_in": -1}, {"kept_samples": 0}, {"thin": 0}, {"vb_iterations": 0},
    ])
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            RunConfig(**kwargs)


class TestModelKind:
    def test_parse(self):
        assert ModelKind.parse("beta-dir") is ModelKind.BETA_DIR
        assert ModelKind.parse("dir-dir") is ModelKind.DIR_DIR
        with pytest.raises(ValueError):
            ModelKind.parse("beta-beta")


class TestConfigFile:
    def test_round_trip(self, tmp_path):
        p = tmp_path / "run.cfg"
        values = {"model": "beta-dir", "k": 100, "gamma": 0.5,
                  "nonparametric": True, "seed": 42}
        save_config_file(p, values)
        assert load_config_file(p) == values

    def test_comments_and_blanks(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("# schedule\n\nburn_in = 10\nengine = cvb\nthin=2\n")
        assert load_config_file(p) == {"burn_in": 10, "engine": "cvb", "thin": 2}

    def test_bad_line(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("just some words\n")
        with pytest.raises(ValueError):
            load_config_file(p)
