import io

import numpy as np
import pytest

from ingarch_sieve import (
    ConstantLink,
    GAConfig,
    SplineLink,
    acf_diagnostic,
    build_sieve_config,
    default_spec,
    l2_loss_mc,
    link_mse_on_path,
    rate_experiment,
    sample_link_coefficients,
    simulate,
    snap_to_grid,
    write_loss_csv,
    write_rate_csv,
)
from ingarch_sieve.config import ExperimentSpec, SimulationSpec


class TestL2Loss:
    def test_identical_links_zero(self, truth):
        loss = l2_loss_mc(truth, truth, n_eval=2000, burn_in=100, seed=1)
        assert loss.loss == 0.0
        assert loss.std_error == 0.0

    def test_constant_offset(self):
        a = ConstantLink(0.5, 2.0)
        b = ConstantLink(0.6, 2.0)
        loss = l2_loss_mc(a, b, n_eval=5000, burn_in=100, seed=2)
        assert loss.loss == pytest.approx(0.01, abs=1e-12)
        assert loss.std_error == pytest.approx(0.0, abs=1e-12)

    def test_symmetric_on_fixed_path(self, truth):
        other = ConstantLink(0.9, 2.0)
        path = simulate(truth, 5000, burn_in=100, seed=3)
        ab, _ = link_mse_on_path(truth, other, path)
        ba, _ = link_mse_on_path(other, truth, path)
        assert ab == ba
        assert ab >= 0.0

    def test_grid_snapped_oracle_spline(self, truth, reference_sieve):
        # Best-possible grid candidate: snap the anchored samples of the
        # truth to the coefficient grid; its loss bounds what the sieve can
        # express, well under 0.01.
        coeffs = snap_to_grid(
            sample_link_coefficients(reference_sieve, truth), reference_sieve.grid
        )
        oracle = SplineLink(reference_sieve, coeffs)
        loss = l2_loss_mc(oracle, truth, n_eval=100_000, burn_in=1000, seed=4)
        assert loss.loss < 0.01

    def test_std_error_scaling(self, truth):
        # doubling the evaluation length shrinks the standard error by
        # roughly 1/sqrt(2) on average
        other = ConstantLink(1.0, 2.0)
        ratios = []
        for seed in range(50):
            a = l2_loss_mc(other, truth, n_eval=4000, burn_in=50, seed=seed)
            b = l2_loss_mc(other, truth, n_eval=8000, burn_in=50, seed=1000 + seed)
            ratios.append(b.std_error / a.std_error)
        assert abs(np.mean(ratios) - 1.0 / np.sqrt(2.0)) < 0.2 / np.sqrt(2.0)

    def test_negative_loss_rejected(self):
        from ingarch_sieve import LossEstimate

        with pytest.raises(ValueError):
            LossEstimate(-0.1, 10, 0.0, 0)


class TestAcfDiagnostic:
    def test_iid_counts_inside_null_band(self):
        path = simulate(ConstantLink(1.0, 2.0), 100_000, burn_in=10, seed=5)
        rho = acf_diagnostic(path, 20)
        assert rho.shape == (20,)
        assert np.all(np.abs(rho) <= 0.02)

    def test_reference_link_decay(self, truth):
        path = simulate(truth, 100_000, burn_in=100, seed=6)
        rho = acf_diagnostic(path, 10)
        assert abs(rho[9]) < abs(rho[0])
        assert rho[0] > 0.0

    def test_zero_lag_empty(self, truth):
        path = simulate(truth, 100, burn_in=10, seed=7)
        assert acf_diagnostic(path, 0).size == 0

    def test_short_path_rejected(self, truth):
        path = simulate(truth, 50, burn_in=10, seed=8)
        with pytest.raises(ValueError):
            acf_diagnostic(path, 10)


def _tiny_spec(seed=0):
    spec = default_spec()
    return ExperimentSpec(
        truth=spec.truth,
        simulation=SimulationSpec(n=200, burn_in=20, seed=seed),
        sieve=spec.sieve,
        ga=GAConfig(population=12, generations=8, seed=seed),
        evaluation=type(spec.evaluation)(n_eval=3000, burn_in=100, seed=seed),
    )


class TestRateExperiment:
    def test_rows_and_determinism(self):
        spec = _tiny_spec(seed=11)
        table = rate_experiment([150, 150, 300], 2, spec)
        assert [r.n for r in table.rows] == [150, 150, 300]
        assert all(r.median_loss > 0 for r in table.rows)
        assert all(r.iqr_low <= r.median_loss <= r.iqr_high for r in table.rows)
        # repeated sample size reproduces the identical row
        assert table.rows[0].median_loss == table.rows[1].median_loss
        again = rate_experiment([150, 150, 300], 2, spec)
        assert again.rows == table.rows
        assert again.fitted_slope == table.fitted_slope

    def test_validation(self):
        spec = _tiny_spec()
        with pytest.raises(ValueError):
            rate_experiment([100, 200], 1, spec)
        with pytest.raises(ValueError):
            rate_experiment([300, 200, 100], 1, spec)
        with pytest.raises(ValueError):
            rate_experiment([100, 200, 300], 0, spec)
        with pytest.raises(TypeError):
            rate_experiment([100, 200, 300], 1, spec="not a spec")


class TestCsvWriters:
    def test_loss_csv(self, truth):
        loss = l2_loss_mc(ConstantLink(1.0, 2.0), truth, n_eval=500, burn_in=10, seed=9)
        buf = io.StringIO()
        write_loss_csv(loss, buf)
        lines = buf.getvalue().strip().splitlines()
        assert lines[0] == "loss,std_error,n_eval,seed"
        fields = lines[1].split(",")
        assert float(fields[0]) == loss.loss
        assert int(fields[2]) == 500

    def test_rate_csv(self):
        spec = _tiny_spec(seed=12)
        table = rate_experiment([120, 160, 200], 1, spec)
        buf = io.StringIO()
        write_rate_csv(table, buf)
        lines = buf.getvalue().strip().splitlines()
        assert lines[0] == "n,median_loss,iqr_low,iqr_high,seeds"
        assert len(lines) == 4
