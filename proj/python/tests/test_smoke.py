import json
import math

import numpy as np
import pytest

import idpoint


def test_version():
    assert idpoint.__version__ == "0.3.0"


def test_gamma_series_mean():
    sums = idpoint.fk_sums(idpoint.LevyMeasure.gamma(1.5), seed=7, replicates=4000)
    assert sums.shape == (4000,)
    se = sums.std(ddof=1) / math.sqrt(sums.size)
    assert abs(sums.mean() - 1.5) <= 3 * se


def test_series_is_deterministic_across_threads():
    m = idpoint.LevyMeasure.stable(0.5)
    a = idpoint.fk_sums(m, seed=3, replicates=500, threads=1)
    b = idpoint.fk_sums(m, seed=3, replicates=500, threads=2)
    assert np.array_equal(a, b)


def test_tails():
    assert idpoint.LevyMeasure.stable(0.5).tail(4.0) == pytest.approx(0.5)
    assert idpoint.LevyMeasure.product(0.5, "point_mass", 2.0).tail(1.0) == pytest.approx(math.sqrt(2.0))
    assert idpoint.LevyMeasure.gamma(2.0).tail(1.0) == pytest.approx(0.438768, rel=1e-5)


def test_domain_errors():
    with pytest.raises(ValueError):
        idpoint.LevyMeasure.stable(2.5)
    with pytest.raises(idpoint.PreconditionError):
        idpoint.fk_sums(idpoint.LevyMeasure.stable(1.2), seed=1, replicates=1)


def test_block_scheme_worked_row():
    b = idpoint.block_scheme(10_000, "harmonic")
    assert (b["r"], b["k"], b["m"]) == (1000, 10, 100)
    assert b["k_alpha_m"] == pytest.approx(0.1)


def test_laplace_point_mass():
    # Unit marks reduce to the Poisson formula exp(-(1 - e^-1) * 1).
    v = idpoint.laplace_analytic(0.5, "point_mass", 1.0, 0.0, "indicator", 1.0, math.inf)
    assert v == pytest.approx(math.exp(-(1 - math.exp(-1))), rel=1e-8)


def test_rows_and_ks():
    row = idpoint.iid_row(0.7, 1000, seed=1)
    assert row.shape == (1000,) and (row > 0).all()
    same = idpoint.ks_two_sample(row, row)
    assert same["statistic"] == 0.0 and not same["reject"]
    assert idpoint.linear_row(0.7, 0.5, 200, seed=2).shape == (200,)


def test_run_config(tmp_path):
    text = "[experiment]\nkind = sample\nseed = 4\nreplicates = 200\n[measure]\nkind = gamma\nalpha = 1\n"
    manifest = idpoint.run_config(text, str(tmp_path / "a"))
    assert "samples.csv" in manifest["files"]
    idpoint.run_config(text, str(tmp_path / "b"), threads=2)
    assert (tmp_path / "a" / "samples.csv").read_bytes() == (tmp_path / "b" / "samples.csv").read_bytes()
    with pytest.raises(idpoint.ConfigError, match="experiment.seed"):
        idpoint.run_config("[experiment]\nkind = sample\n", str(tmp_path / "c"))


def test_recipes_listed():
    assert "gamma-fk" in idpoint.recipes()
