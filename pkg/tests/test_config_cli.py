import json

import numpy as np
import pytest

from parityqec import artifacts, cli
from parityqec.config import ConfigError, parse_config, serialize_config
from parityqec.scenarios import default_config, derive_params_report, run_scenario
from parityqec.models import BareParams

COL1_TOML = """
scenario = "custom"

[bare]
g1 = 94.84
g2 = 72.46
alpha1 = 232.27
alpha2 = 383.80
delta_r = 420.00
delta_2 = 62.66

[measurement]
epsilon = 2.1
kappa = 3.0
eta = 1.0

[protocol]
encoding = "odd"
tau = 1.0

[sim]
dt = 0.00025
t_final = 1.0
seed = 3
n_max = 14
order = "fourth"

[run]
n_trajectories = 1
output_dir = "out"
"""


class TestConfig:
    def test_round_trip_identity(self):
        cfg = parse_config(COL1_TOML)
        text = serialize_config(cfg)
        cfg2 = parse_config(text)
        assert cfg2.as_dict() == cfg.as_dict()
        assert serialize_config(cfg2) == text

    def test_requires_exactly_one_parameter_block(self):
        with pytest.raises(ConfigError):
            parse_config('scenario = "custom"\n[measurement]\nepsilon = 1.0\n'
                         'kappa = 2.0\neta = 0.5\n')
        both = COL1_TOML + '\n[effective]\nchi1 = 4.0\nchi2 = 4.0\n'
        with pytest.raises(ConfigError):
            parse_config(both)

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError):
            parse_config(COL1_TOML + "\n[banana]\nx = 1\n")

    def test_unknown_scenario_rejected(self):
        with pytest.raises(ConfigError):
            parse_config('scenario = "fig9"\n[effective]\nchi1 = 1.0\nchi2 = 1.0\n')

    def test_gamma_q_override(self):
        cfg = parse_config(
            'scenario = "custom"\n[effective]\nchi1 = 4.0\nchi2 = 4.0\n'
            '[measurement]\nepsilon = 1.0\nkappa = 2.0\neta = 0.5\n'
            'gamma1 = 0.1\ngamma2 = 0.2\n')
        assert cfg.measurement_params().gamma_q == (0.1, 0.2)


class TestDeriveParams:
    def test_reference_point(self):
        bare = BareParams(g1=94.84, g2=72.46, alpha1=232.27, alpha2=383.80,
                          delta_r=420.00, delta_2=62.66)
        report = derive_params_report(bare)
        fourth = report["fourth_order"]
        for key, target in (("chi1", 6.44), ("chi2", 6.44), ("nu1", -0.20),
                            ("nu2", -0.20), ("alpha_r", -0.04),
                            ("zeta12", 0.23), ("xi12", -0.47)):
            assert fourth[key] == pytest.approx(target, abs=0.005)
        assert "pt_vs_oracle_relative" in report
        assert report["pt_vs_oracle_relative"]["chi1"] < 0.05

    def test_zero_coupling(self):
        bare = BareParams(g1=0.0, g2=0.0, alpha1=250.0, alpha2=300.0,
                          delta_r=500.0, delta_2=60.0)
        report = derive_params_report(bare, include_oracle=False)
        for key in ("chi1", "chi2", "nu1", "nu2", "alpha_r", "zeta12", "xi12"):
            assert report["fourth_order"][key] == pytest.approx(0.0, abs=1e-12)


class TestScenarios:
    def test_trivial_dynamics_smoke(self, tmp_path):
        text = (
            'scenario = "custom"\n'
            "[effective]\nchi1 = 4.04\nchi2 = 4.04\n"
            "[measurement]\nepsilon = 0.0\nkappa = 2.0\neta = 0.0\ngamma = 0.0\n"
            '[protocol]\nencoding = "even"\ntau = 1.0\ni_bar_odd = -2.8\n'
            "initial_filter = 0.0\n"
            "[sim]\ndt = 0.001\nt_final = 1.0\nseed = 1\nrecord_stride = 50\n"
            'n_max = 10\norder = "second"\ninitial_resonator = "ground"\n'
            "[run]\nn_trajectories = 1\n"
        )
        cfg = parse_config(text)
        files = run_scenario(cfg, tmp_path)
        traj_csv = tmp_path / "trajectory_000.csv"
        assert traj_csv in files
        rows = np.genfromtxt(traj_csv, delimiter=",", skip_header=1)
        i_filtered, purity = rows[:, 2], rows[:, 3]
        assert np.allclose(i_filtered, 0.0, atol=1e-12)
        assert np.allclose(purity, 1.0, atol=1e-9)
        events = (tmp_path / "events_000.csv").read_text().strip().splitlines()
        assert events == ["t,kind,payload"]

    def test_fig2_rerun_byte_identical(self, tmp_path):
        cfg = default_config("fig2_odd")
        cfg.sim["t_final"] = 2.0
        cfg.run["n_trajectories"] = 2
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        files_a = run_scenario(cfg, out_a)
        cfg_b = default_config("fig2_odd")
        cfg_b.sim["t_final"] = 2.0
        cfg_b.run["n_trajectories"] = 2
        files_b = run_scenario(cfg_b, out_b)
        names_a = sorted(f.name for f in files_a)
        assert names_a == sorted(f.name for f in files_b)
        for name in names_a:
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_fig1b_odd_sectors_identical(self, tmp_path):
        cfg = default_config("fig1b_steady_states")
        cfg.sim["t_final"] = 6.0
        files = run_scenario(cfg, tmp_path)
        g01 = artifacts.read_wigner_csv(tmp_path / "wigner_ss_01.csv")
        g10 = artifacts.read_wigner_csv(tmp_path / "wigner_ss_10.csv")
        assert np.max(np.abs(g01.values - g10.values)) < 1e-6
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["odd_grid_max_abs_diff"] < 1e-6
        # even-sector grids are mirrored in x, not identical
        g00 = artifacts.read_wigner_csv(tmp_path / "wigner_ss_00.csv")
        g11 = artifacts.read_wigner_csv(tmp_path / "wigner_ss_11.csv")
        assert np.max(np.abs(g00.values - g11.values)) > 1e-3
        assert np.max(np.abs(g00.values - g11.values[::-1, :])) < 1e-6

    def test_fig1c_movie_qualitative_signatures(self, tmp_path):
        # fourth-order flip movie: the odd steady state sits at negative X
        # (three-body shift), and right after the flip the two even branches
        # are visibly asymmetric in amplitude (stochastic localization)
        cfg = default_config("fig1c_flip_movie")
        run_scenario(cfg, tmp_path)
        g0 = artifacts.read_wigner_csv(tmp_path / "wigner_t0p000.csv")
        i, j = np.unravel_index(np.argmax(g0.values), g0.values.shape)
        assert g0.x_axis[i] < -0.3
        assert g0.y_axis[j] < -0.5
        assert g0.integral() == pytest.approx(1.0, abs=0.02)
        g1 = artifacts.read_wigner_csv(tmp_path / "wigner_t0p100.csv")
        mirror_asymmetry = np.max(np.abs(g1.values - g1.values[::-1, :]))
        assert mirror_asymmetry > 0.1

    def test_manifest_hashes_match_files(self, tmp_path):
        cfg = default_config("appC_meter_qubit")
        cfg.sim["t_final"] = 1.0
        run_scenario(cfg, tmp_path)
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["files"]
        for entry in manifest["files"]:
            assert artifacts.sha256_file(tmp_path / entry["name"]) == entry["sha256"]


class TestCliEntryPoints:
    def test_run_and_wigner(self, tmp_path):
        out = tmp_path / "run"
        rc = cli.main(["run", "--scenario", "appC_meter_qubit", "--out", str(out)])
        assert rc == 0
        state = next(out.glob("final_state_*.npz"))
        rc = cli.main(["wigner", "--state", str(state), "--out", str(tmp_path),
                       "--extent", "3", "--points", "11"])
        assert rc == 0

    def test_derive_params_cli(self, tmp_path):
        cfg_path = tmp_path / "col1.toml"
        cfg_path.write_text(COL1_TOML)
        rc = cli.main(["derive-params", "--config", str(cfg_path),
                       "--out", str(tmp_path), "--no-oracle"])
        assert rc == 0
        report = json.loads((tmp_path / "derived_params.json").read_text())
        assert report["fourth_order"]["chi1"] == pytest.approx(6.44, abs=0.005)

    def test_validate_subset(self, capsys):
        rc = cli.main(["validate", "--only", "spectrum_check,table1_reproduction"])
        out = capsys.readouterr().out
        assert rc == 0
        assert out.count("[PASS]") == 2

    def test_bad_config_is_reported(self, tmp_path, capsys):
        bad = tmp_path / "bad.toml"
        bad.write_text('scenario = "custom"\n')
        rc = cli.main(["run", "--config", str(bad)])
        assert rc == 2
        assert "error" in capsys.readouterr().err

    def test_negative_control_tampered_chi(self):
        # scaling chi1 by 1.1 (fourth order admits unequal shifts) breaks the
        # odd-sector cancellation and moves the steady signal off -2.8
        import parityqec.sme as sme
        from parityqec.hilbert import basis_ket
        from parityqec.models import (EffectiveParams, MeasurementParams,
                                      build_dispersive_parity_model)
        from parityqec.scenarios import sector_initial_state

        eff = EffectiveParams(chi1=4.04 * 1.1, chi2=4.04)
        meas = MeasurementParams(epsilon=1.4, kappa=2.0, eta=0.0)
        model = build_dispersive_parity_model(eff, meas, n_max=12, order="fourth")
        rho0 = sector_initial_state("01", basis_ket(0, 12), 12)
        sim = sme.SimConfig(dt=1e-3, t_final=8.0, seed=1, record_stride=400,
                            n_max=12, store_noise=False)
        traj = sme.run_trajectory(model, meas, sim, rho0)
        assert abs(float(traj.y_expect[-1]) + 2.8) > 0.03
