"""End-to-end smoke tests of the Python bindings."""

import math

import pytest

import ionfringe as ifr


@pytest.fixture(scope="module")
def cfg():
    return ifr.default_config()


def test_version():
    assert ifr.__version__


def test_two_ion_positions_closed_form():
    u = ifr.solve_positions(2)
    r = 0.25 ** (1.0 / 3.0)
    assert u[0] == pytest.approx(-r, abs=1e-12)
    assert u[1] == pytest.approx(r, abs=1e-12)


def test_calibration_endpoint(cfg):
    assert ifr.axial_frequency_hz(cfg, 4.0) == pytest.approx(60e3, rel=1e-3)
    assert ifr.axial_frequency_hz(cfg, 900.0) == pytest.approx(1044e3, rel=1e-3)


def test_chain_positions_scale(cfg):
    z = ifr.chain_positions_m(cfg, 3, 9.0)
    assert len(z) == 3
    assert z[1] == pytest.approx(0.0, abs=1e-20)
    assert z[2] > 0 and z[2] == -z[0]
    assert 1e-6 < z[2] < 1e-4


def test_fringe_period(cfg):
    lam = cfg.wavelength_m
    theta = cfg.theta_rad
    assert ifr.fringe_period_m(cfg) == pytest.approx(
        lam / (1.0 - math.cos(theta)), rel=1e-12
    )


def test_pattern_bounds_and_determinism(cfg):
    grid = [4.5 + 7.5 * i / 400 for i in range(401)]
    a = ifr.pattern(cfg, 2, grid)
    b = ifr.pattern(cfg, 2, grid)
    assert a == b
    assert all(v >= 0.0 for v in a)
    assert max(a) <= 4.0 + 1e-9
    assert max(a) > 2.0  # constructive fringes beat the incoherent level


def test_coherent_intensity_peak():
    assert ifr.coherent_intensity([0.0] * 5, [1.0] * 5) == pytest.approx(25.0)


def test_fit_roundtrip_csv(cfg, tmp_path):
    grid = [4.5 + 7.5 * i / 120 for i in range(121)]
    rates = ifr.pattern(cfg, 2, grid, kappa=8.0, i_incoh=14.4)
    path = tmp_path / "scan.csv"
    lines = ["# ions=2", "u_tip_V,rate_cps,stderr_cps"]
    lines += [f"{u:.16e},{r:.16e},1.0" for u, r in zip(grid, rates)]
    path.write_text("\n".join(lines) + "\n")

    fit = ifr.fit_csv(cfg, str(path))
    assert fit["converged"]
    assert fit["i_incoh"] == pytest.approx(14.4, rel=1e-6)
    assert fit["kappa"] == pytest.approx(8.0, rel=1e-6)
    assert fit["chi2"] < 1e-10


def test_visibility_helpers():
    v = ifr.background_subtracted_visibility(0.19, 42.16, 9.3)
    assert v == pytest.approx(0.34, abs=0.005)


def test_peak_width_narrows(cfg):
    w2 = ifr.max_peak_width(cfg, 2, 4.5, 12.0)
    w3 = ifr.max_peak_width(cfg, 3, 4.5, 12.0)
    assert w3["width_rad"] < w2["width_rad"]
    assert w2["width_rad"] == pytest.approx(math.pi, rel=0.05)


def test_scaling_bounds(cfg):
    rows = ifr.peak_scaling(cfg, [2, 3, 4], 5.0, 60.0)
    for row in rows:
        n = row["n_ions"]
        assert n < row["max_intensity"] < n * n


def test_jitter_mc_deterministic(cfg):
    a = ifr.jitter_mc(cfg, 3, 0.0, realizations=5, seed=9, u_lo_v=5.0, u_hi_v=60.0)
    b = ifr.jitter_mc(cfg, 3, 0.0, realizations=5, seed=9, u_lo_v=5.0, u_hi_v=60.0)
    assert a["maxima"] == b["maxima"]
    assert a["mean_max"] == pytest.approx(9.0, rel=1e-6)


def test_cli_entry(tmp_path):
    out = tmp_path / "pos.csv"
    code = ifr.run_cli(["positions", "--ions", "2", "--out", str(out)])
    assert code == 0
    text = out.read_text()
    assert "u_dimensionless" in text
    code = ifr.run_cli(["positions", "--ions", "0", "--out", str(out)])
    assert code == 2


def test_validation_error_maps_to_value_error(cfg):
    with pytest.raises(ValueError):
        ifr.solve_positions(0)
