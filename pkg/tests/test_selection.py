import numpy as np
import pytest
from scipy import stats

import parcornet.em as em_mod
from parcornet.elastic_net import PenaltyConfig
from parcornet.em import EMConfig, estimate
from parcornet.errors import ConfigError, EstimationError, SelectionError
from parcornet.matrices import Dataset, PrecisionMatrix
from parcornet.netgen import TopologySpec, generate_precision
from parcornet.samplers import DistributionSpec, sample, spawned_rng
from parcornet.selection import (
    LambdaGrid,
    bic,
    build_grid,
    count_parameters,
    gaussian_log_likelihood,
    select,
    t_log_likelihood,
)


class TestBuildGrid:
    def test_endpoints_exact(self):
        g = build_grid(np.exp(-6), 2.0, 100)
        assert g.values[0] == np.exp(-6)
        assert g.values[-1] == 2.0
        assert g.count == 100

    def test_constant_ratio(self):
        g = build_grid(0.001, 1.5, 40)
        r = np.asarray(g.values[1:]) / np.asarray(g.values[:-1])
        assert np.abs(r - r[0]).max() < 1e-12 * r[0]

    def test_single_value(self):
        g = build_grid(0.5, 0.5, 1)
        assert g.values == (0.5,)

    def test_validation(self):
        with pytest.raises(ConfigError):
            build_grid(0.0, 1.0, 5)
        with pytest.raises(ConfigError):
            build_grid(1.0, 0.5, 5)
        with pytest.raises(ConfigError):
            build_grid(0.5, 1.0, 1)
        with pytest.raises(ConfigError):
            LambdaGrid((0.2, 0.1))


class TestLikelihoodOracles:
    def test_gaussian_matches_scipy(self):
        rng = np.random.default_rng(60)
        x = rng.standard_normal((30, 4))
        mean = rng.standard_normal(4)
        a = rng.standard_normal((4, 4))
        psi = PrecisionMatrix(a @ a.T + 4 * np.eye(4))
        want = stats.multivariate_normal.logpdf(x, mean, np.linalg.inv(psi.values)).sum()
        got = gaussian_log_likelihood(Dataset(x), mean, psi)
        assert got == pytest.approx(want, rel=1e-10)

    def test_t_matches_scipy(self):
        rng = np.random.default_rng(61)
        x = rng.standard_normal((25, 3))
        mean = rng.standard_normal(3)
        a = rng.standard_normal((3, 3))
        psi = PrecisionMatrix(a @ a.T + 3 * np.eye(3))
        nu = 4.5
        want = stats.multivariate_t.logpdf(x, mean, np.linalg.inv(psi.values), df=nu).sum()
        got = t_log_likelihood(Dataset(x), mean, psi, nu)
        assert got == pytest.approx(want, rel=1e-10)


class TestBIC:
    def test_formula(self):
        rng = np.random.default_rng(62)
        data = Dataset(rng.standard_normal((100, 4)))
        cfg = EMConfig(PenaltyConfig(0.5, 0.3), mode="gaussian")
        state = estimate(data, cfg)
        ll = gaussian_log_likelihood(data, state.mean, state.psi)
        k = len(state.edges) + 4
        assert bic(state, data, cfg) == pytest.approx(-2 * ll + np.log(100) * k, rel=1e-12)
        assert count_parameters(state) == k

    def test_t_mode_uses_t_likelihood(self):
        edges, theta = generate_precision(TopologySpec("band", 4, seed=5))
        data = sample(theta, 200, DistributionSpec("t", nu=3.0), spawned_rng(1, 0))
        cfg = EMConfig(PenaltyConfig(0.5, 0.3), mode="t", nu=3.0)
        state = estimate(data, cfg)
        ll = t_log_likelihood(data, state.mean, state.psi, 3.0)
        want = -2 * ll + np.log(200) * count_parameters(state)
        assert bic(state, data, cfg) == pytest.approx(want, rel=1e-12)


class TestSelect:
    def test_picks_minimum_bic(self):
        edges, theta = generate_precision(TopologySpec("scale-free", 6, seed=6))
        data = sample(theta, 400, DistributionSpec("normal"), spawned_rng(2, 0))
        grid = build_grid(0.02, 1.0, 8)
        cfg = EMConfig(PenaltyConfig(0.5, grid.lo), mode="gaussian")
        report = select(data, grid, cfg)
        finite = [r.bic for r in report.records if not r.failed]
        assert report.bic_value == min(finite)
        assert len(report.records) == 8
        assert report.chosen_lambda == grid.values[report.chosen_index]

    def test_ties_go_to_larger_lambda(self):
        rng = np.random.default_rng(63)
        data = Dataset(rng.standard_normal((100, 4)))
        # both grid points far above lambda_max give the identical empty model
        grid = build_grid(50.0, 80.0, 3)
        cfg = EMConfig(PenaltyConfig(0.5, grid.lo), mode="gaussian")
        report = select(data, grid, cfg)
        bics = [r.bic for r in report.records]
        assert max(bics) - min(bics) < 1e-9
        assert report.chosen_index == 2
        assert report.chosen_lambda == 80.0

    def test_failed_lambdas_excluded(self, monkeypatch):
        calls = {"n": 0}
        real = em_mod.estimate

        def flaky(data, config):
            calls["n"] += 1
            if calls["n"] == 1:
                raise EstimationError("forced failure")
            return real(data, config)

        monkeypatch.setattr("parcornet.selection.estimate", flaky)
        rng = np.random.default_rng(64)
        data = Dataset(rng.standard_normal((80, 3)))
        grid = build_grid(0.1, 1.0, 3)
        cfg = EMConfig(PenaltyConfig(0.5, 0.1), mode="gaussian")
        report = select(data, grid, cfg)
        assert report.records[0].failed
        assert "forced failure" in report.records[0].error
        assert not np.isfinite(report.records[0].bic)
        assert report.chosen_index >= 1

    def test_all_failed_raises_with_records(self, monkeypatch):
        def broken(data, config):
            raise EstimationError("nope")

        monkeypatch.setattr("parcornet.selection.estimate", broken)
        rng = np.random.default_rng(65)
        data = Dataset(rng.standard_normal((40, 3)))
        grid = build_grid(0.1, 1.0, 4)
        cfg = EMConfig(PenaltyConfig(0.5, 0.1), mode="gaussian")
        with pytest.raises(SelectionError) as err:
            select(data, grid, cfg)
        assert len(err.value.records) == 4

    def test_report_serialization(self):
        rng = np.random.default_rng(66)
        data = Dataset(rng.standard_normal((60, 3)))
        grid = build_grid(0.1, 1.0, 4)
        cfg = EMConfig(PenaltyConfig(0.5, 0.1), mode="gaussian")
        report = select(data, grid, cfg)
        text = report.to_csv_text()
        assert text.splitlines()[0] == "lambda,bic,edges,em_converged,failed,error"
        assert len(text.splitlines()) == 5
        d = report.to_json_dict()
        assert d["chosen_lambda"] == report.chosen_lambda
        assert len(d["records"]) == 4
