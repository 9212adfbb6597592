"""Config schema, validation, and the command-line surface."""

import json

import numpy as np
import pytest

from qsurf import cli
from qsurf import config as cfgmod
from qsurf.errors import ConfigError


def paper_config(**sweep_overrides):
    cfg = cfgmod.RunConfig()
    cfg.chart.params = {"radius": 1.0}
    for key, val in sweep_overrides.items():
        setattr(cfg.sweep, key, val)
    return cfg


def write_config(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(cfgmod.serialize(cfg), encoding="utf-8")
    return path


def read_csv(path):
    lines = path.read_text().strip().splitlines()
    assert lines[0].startswith("# units:")
    header = lines[1].split(",")
    data = np.array([[float(x) for x in ln.split(",")] for ln in lines[2:]])
    return header, data


# ---------------------------------------------------------------------------
# config round-trip and validation
# ---------------------------------------------------------------------------


def test_config_round_trip():
    cfg = paper_config()
    cfg.numerics.l_max = 6
    cfg.profile.kappa = 0.5
    again = cfgmod.parse(cfgmod.serialize(cfg))
    assert again == cfg
    assert cfgmod.parse(cfgmod.serialize(again)) == again


def test_config_defaults_follow_studied_setup():
    cfg = cfgmod.RunConfig()
    assert cfg.profile.epsilon == 0.1
    assert cfg.profile.omega == 8.0
    assert cfg.well.e0 == 70.0
    assert cfg.profile.kappa == 1.0  # documented assumption
    assert cfg.profile.ditch_count == 2  # two helical ditch lines


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError, match="unknown"):
        cfgmod.parse(json.dumps({"profile": {"epsilonn": 0.1}}))
    with pytest.raises(ConfigError, match="unknown"):
        cfgmod.parse(json.dumps({"wells": {}}))


def test_validation_rejects_bad_epsilon():
    cfg = paper_config()
    cfg.profile.epsilon = 0.9
    with pytest.raises(ConfigError, match="epsilon"):
        cfgmod.resolve(cfg)


def test_validation_rejects_empty_energy_range():
    cfg = paper_config(e1_min=2.0, e1_max=1.0)
    with pytest.raises(ConfigError, match="energy range"):
        cfgmod.resolve(cfg)


def test_validation_rejects_small_l_max():
    cfg = paper_config()
    cfg.numerics.l_max = 1  # modes up to l = 2 open at 4.5 e0
    with pytest.raises(ConfigError, match="l_max"):
        cfgmod.resolve(cfg)


def test_validation_rejects_coarse_dz():
    cfg = paper_config()
    cfg.numerics.dz = 0.5
    setup = cfgmod.resolve(cfg)
    with pytest.raises(ConfigError, match="dz"):
        cfgmod.build_operator(setup)


def test_dominance_warning():
    cfg = paper_config(e1_max=20.0)
    with pytest.warns(UserWarning, match="dominate"):
        cfgmod.resolve(cfg)


def test_override_parsing():
    cfg = paper_config()
    cfgmod.apply_override(cfg, "profile.kappa", "0.5")
    assert cfg.profile.kappa == 0.5
    cfgmod.apply_override(cfg, "numerics.include_vg", "false")
    assert cfg.numerics.include_vg is False
    with pytest.raises(ConfigError):
        cfgmod.apply_override(cfg, "profile.nope", "1")
    with pytest.raises(ConfigError):
        cfgmod.apply_override(cfg, "kappa", "1")


def test_resolved_energies_avoid_thresholds():
    cfg = paper_config(e1_min=0.5, e1_max=1.5, n_points=3)  # grid hits 1.0
    setup = cfgmod.resolve(cfg)
    assert np.min(np.abs(setup.energies_relative - 1.0)) > 1e-9


# ---------------------------------------------------------------------------
# CLI commands
# ---------------------------------------------------------------------------


def test_cmd_curvature_cylinder_constant_vg(tmp_path):
    cfg = paper_config()
    path = write_config(tmp_path, cfg)
    rc = cli.main(
        ["curvature", "--config", str(path), "--out", str(tmp_path)]
    )
    assert rc == 0
    header, data = read_csv(tmp_path / "run_curvature.csv")
    vg_col = header.index("Vg[e0]")
    np.testing.assert_allclose(data[:, vg_col], -0.25, atol=1e-12)


def test_cmd_curvature_sphere_zero_vg(tmp_path):
    cfg = paper_config()
    cfg.chart.kind = "sphere"
    cfg.chart.params = {"radius": 2.0}
    path = write_config(tmp_path, cfg)
    assert cli.main(["curvature", "--config", str(path), "--out", str(tmp_path)]) == 0
    header, data = read_csv(tmp_path / "run_curvature.csv")
    np.testing.assert_allclose(data[:, header.index("Vg[e0]")], 0.0, atol=1e-10)


def test_cmd_curvature_torus_matches_closed_form(tmp_path):
    big, small = 2.0, 0.5
    cfg = paper_config()
    cfg.chart.kind = "torus"
    cfg.chart.params = {"major": big, "minor": small}
    path = write_config(tmp_path, cfg)
    assert cli.main(["curvature", "--config", str(path), "--out", str(tmp_path)]) == 0
    header, data = read_csv(tmp_path / "run_curvature.csv")
    u = data[:, header.index("q1[a]")]
    w = big + small * np.cos(u)
    m_exact = 0.5 * (-1.0 / small - np.cos(u) / w)
    k_exact = np.cos(u) / (small * w)
    np.testing.assert_allclose(data[:, header.index("M[1/a]")], m_exact, atol=1e-10)
    np.testing.assert_allclose(data[:, header.index("K[1/a^2]")], k_exact, atol=1e-10)


def test_cmd_sweep_homogeneous_staircase(tmp_path):
    cfg = paper_config(n_points=120, e1_min=0.1, e1_max=4.5)
    cfg.profile.kind = "homogeneous"
    path = write_config(tmp_path, cfg)
    assert cli.main(["sweep", "--config", str(path), "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "run_sweep_summary.json").read_text())
    levels = {p["level"] for p in summary["plateaus"]}
    assert {1, 3} <= levels
    # detected plateau boundaries sit near the analytic thresholds 1 and 4
    p1 = [p for p in summary["plateaus"] if p["level"] == 1][0]
    p3 = [p for p in summary["plateaus"] if p["level"] == 3][0]
    assert abs(p1["e1_rel_end"] - 1.0) < 0.1
    assert abs(p3["e1_rel_start"] - 1.0) < 0.1
    assert 1.0 in summary["thresholds_relative"]
    assert summary["diagnostics"]["max_unitarity_residual"] < 1e-8


def test_cmd_sweep_helical_two_sigma_plateau(tmp_path):
    # the corrugated setup (paper parameters, kappa from the acceptance grid,
    # tapered window) produces a 2 sigma0 plateau inside the 3 sigma0 step
    cfg = paper_config(n_points=90, e1_min=0.2, e1_max=3.6)
    cfg.profile.kappa = 0.5
    pitch = 2 * np.pi / (8.0 * 0.5)
    cfg.numerics.taper = 1.5 * pitch
    path = write_config(tmp_path, cfg)
    assert cli.main(["sweep", "--config", str(path), "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "run_sweep_summary.json").read_text())
    assert any(p["level"] == 2 for p in summary["plateaus"])


def test_cmd_sweep_csv_deterministic(tmp_path):
    cfg = paper_config(n_points=12, e1_min=0.4, e1_max=2.0)
    cfg.profile.kappa = 0.5
    path = write_config(tmp_path, cfg)
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    assert cli.main(["sweep", "--config", str(path), "--out", str(out1)]) == 0
    assert cli.main(["sweep", "--config", str(path), "--out", str(out2)]) == 0
    assert (out1 / "run_sweep.csv").read_bytes() == (out2 / "run_sweep.csv").read_bytes()


def test_cmd_sweep_empty_range_exits_1(tmp_path):
    cfg = paper_config(e1_min=2.0, e1_max=2.0)
    path = write_config(tmp_path, cfg)
    assert cli.main(["sweep", "--config", str(path), "--out", str(tmp_path)]) == 1


def test_cmd_density_homogeneous_uniform(tmp_path):
    cfg = paper_config()
    cfg.profile.kind = "homogeneous"
    cfg.numerics.length = 2.0
    path = write_config(tmp_path, cfg)
    rc = cli.main(
        [
            "density",
            "--config",
            str(path),
            "--out",
            str(tmp_path),
            "--e1",
            "2.0",
            "--mode",
            "0",
        ]
    )
    assert rc == 0
    header, data = read_csv(tmp_path / "run_density.csv")
    dens = data[:, header.index("density[1/a^2]")]
    np.testing.assert_allclose(dens, 1.0 / (2 * np.pi), atol=1e-10)
    meta = json.loads((tmp_path / "run_density.json").read_text())
    assert meta["l_incident"] == 0


def test_cmd_density_closed_channel_names_threshold(tmp_path, capsys):
    cfg = paper_config()
    cfg.profile.kind = "homogeneous"
    cfg.numerics.length = 2.0
    path = write_config(tmp_path, cfg)
    rc = cli.main(
        [
            "density",
            "--config",
            str(path),
            "--out",
            str(tmp_path),
            "--e1",
            "0.5",
            "--mode",
            "2",
        ]
    )
    assert rc == 1
    assert "threshold" in capsys.readouterr().err


def test_cmd_spectrum_sphere(tmp_path):
    cfg = paper_config()
    cfg.chart.kind = "sphere"
    cfg.chart.params = {"radius": 1.0}
    cfg.profile.kind = "homogeneous"
    cfg.numerics.grid_n1 = 60
    cfg.numerics.grid_n2 = 120
    cfg.numerics.spectrum_count = 4
    path = write_config(tmp_path, cfg)
    assert cli.main(["spectrum", "--config", str(path), "--out", str(tmp_path)]) == 0
    header, data = read_csv(tmp_path / "run_spectrum.csv")
    np.testing.assert_allclose(data[:, 1], [0.0, 2.0, 2.0, 2.0], atol=0.05)


def test_cmd_selftest_passes():
    assert cli.main(["selftest"]) == 0


def test_cmd_selftest_fault_injection():
    # a deliberate V_g sign flip must fail the curvature suite,
    # a perturbed flux normalization must fail the unitarity suite
    assert cli.main(["selftest", "--inject", "vg_sign"]) == 2
    assert cli.main(["selftest", "--inject", "velocity_norm"]) == 2


def test_missing_config_is_validation_error():
    assert cli.main(["sweep"]) == 1
