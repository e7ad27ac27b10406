import json
import math

import numpy as np
import pytest

from beamsim.cli import (
    EXIT_CONFIG,
    EXIT_OK,
    ConfigError,
    build_configs,
    main,
    read_config_file,
)


def write_cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestConfigParsing:
    def test_empty_file_gives_defaults(self, tmp_path):
        cfg = write_cfg(tmp_path, "# nothing here\n")
        sim, analytic = build_configs(read_config_file(cfg))
        assert sim.vehicle_count == 30
        assert sim.sim_duration_s == 2000.0
        assert sim.exploration_s == 600.0
        assert sim.epsilon == 0.05
        assert sim.channel.carrier_ghz == 28.0
        assert sim.channel.snr_threshold_db == -5.0
        assert sim.scenario.beam_radius == 80.0
        assert analytic.activity_probs == (0.0, 0.2, 0.4, 0.6, 0.8)

    def test_explicit_default_equals_default(self, tmp_path):
        explicit, _ = build_configs(read_config_file(
            write_cfg(tmp_path, "epsilon = 0.05\n")))
        implicit, _ = build_configs({})
        assert explicit == implicit

    def test_out_of_range_names_key(self, tmp_path):
        with pytest.raises(ConfigError, match="vehicle_count"):
            build_configs(read_config_file(
                write_cfg(tmp_path, "vehicle_count = 41\n")))

    def test_odd_vehicle_count_rejected(self):
        with pytest.raises(ConfigError, match="even"):
            build_configs({"vehicle_count": 7})

    def test_unknown_key_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="bogus"):
            read_config_file(write_cfg(tmp_path, "bogus = 1\n"))

    def test_malformed_line_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="key = value"):
            read_config_file(write_cfg(tmp_path, "no equals sign\n"))

    def test_exploration_restricted_to_documented_set(self):
        with pytest.raises(ConfigError, match="exploration_s"):
            build_configs({"exploration_s": 200.0})

    def test_comments_and_lists(self, tmp_path):
        cfg = write_cfg(tmp_path,
                        "site_x_m = 100, 220, 360  # sites\n"
                        "activity_probs = 0.0,0.3\n"
                        "beamwidth_deg = 60\n")
        sim, analytic = build_configs(read_config_file(cfg))
        assert sim.scenario.site_x == (100.0, 220.0, 360.0)
        assert analytic.activity_probs == (0.0, 0.3)
        assert sim.scenario.beamwidth == pytest.approx(math.pi / 3)


FAST_SIM = ("vehicle_count = 6\nsim_duration_s = 80\nwarmup_s = 10\n"
            "window_s = 10\n")
FAST_ANALYTIC = ("grid_points = 30\nquad_phi = 100\nquad_r = 100\n"
                 "activity_probs = 0.0,0.2,0.4\n")


@pytest.fixture(scope="module")
def analytic_outputs(tmp_path_factory):
    out = tmp_path_factory.mktemp("analytic")
    cfg = out / "cfg.txt"
    cfg.write_text(FAST_ANALYTIC)
    assert main(["analytic", "--config", str(cfg), "--out",
                 str(out / "a")]) == EXIT_OK
    assert main(["analytic", "--config", str(cfg), "--out",
                 str(out / "b")]) == EXIT_OK
    return out


@pytest.fixture(scope="module")
def simulate_outputs(tmp_path_factory):
    out = tmp_path_factory.mktemp("simulate")
    cfg = out / "cfg.txt"
    cfg.write_text(FAST_SIM)
    code = main(["simulate", "--config", str(cfg), "--out",
                 str(out / "runs"), "--seed", "1,2,3", "--policy", "macol"])
    assert code == EXIT_OK
    return out / "runs"


class TestAnalyticCommand:
    def _load(self, path):
        rows = path.read_text().strip().splitlines()
        assert rows[0] == "l_m,cdf"
        return np.array([[float(v) for v in r.split(",")] for r in rows[1:]])

    def test_zero_activity_curve_first_row_is_zero(self, analytic_outputs):
        files = sorted((analytic_outputs / "a").glob("analytic_cdf_beam*_p0.csv"))
        assert files
        data = self._load(files[0])
        assert data[0, 0] == 0.0
        assert data[0, 1] == 0.0

    def test_curves_ordered_in_activity(self, analytic_outputs):
        beam_files = sorted((analytic_outputs / "a").glob("analytic_cdf_beam*_p*.csv"))
        by_p = {f.name: self._load(f) for f in beam_files}
        low = [v for k, v in sorted(by_p.items()) if "p0.2" in k][0]
        high = [v for k, v in sorted(by_p.items()) if "p0.4" in k][0]
        assert np.all(high[:, 1] >= low[:, 1] - 1e-12)

    def test_interfered_area_table(self, analytic_outputs):
        text = (analytic_outputs / "a" / "interfered_area.csv").read_text()
        lines = text.strip().splitlines()
        assert lines[0] == "beam_id,interfered_m2,sector_m2,fraction"
        assert len(lines) == 1 + 18

    def test_rerun_byte_identical(self, analytic_outputs):
        for f in sorted((analytic_outputs / "a").glob("*.csv")):
            assert f.read_bytes() == (analytic_outputs / "b" / f.name).read_bytes()

    def test_figure_rendered(self, analytic_outputs):
        assert list((analytic_outputs / "a").glob("analytic_cdf_beam*.png"))


class TestSimulateCommand:
    def test_three_summaries_plus_merge(self, simulate_outputs):
        assert len(list(simulate_outputs.glob("sim_macol_v6_seed*.json"))) == 3
        assert (simulate_outputs / "summary_macol_v6.csv").exists()

    def test_summary_schema(self, simulate_outputs):
        doc = json.loads((simulate_outputs / "sim_macol_v6_seed1.json").read_text())
        assert "interference" in doc["aggregates"]["exploitation"]
        assert doc["config"]["policy"] == "macol"
        assert doc["config"]["epsilon"] == 0.05  # resolved defaults included
        assert "pushes" in doc["signaling"]

    def test_service_distance_cdf_schema_matches_analytic(self, simulate_outputs):
        path = simulate_outputs / "service_distance_cdf_macol_v6_seed1.csv"
        assert path.read_text().splitlines()[0] == "l_m,cdf"

    def test_timeseries_schema(self, simulate_outputs):
        path = simulate_outputs / "timeseries_macol_v6_seed1.csv"
        assert path.read_text().splitlines()[0] == (
            "t0_s,t1_s,service,interference,outage")

    def test_rerun_byte_identical(self, simulate_outputs, tmp_path):
        cfg = tmp_path / "cfg.txt"
        cfg.write_text(FAST_SIM)
        assert main(["simulate", "--config", str(cfg), "--out",
                     str(tmp_path / "again"), "--seed", "1", "--policy",
                     "macol"]) == EXIT_OK
        a = (simulate_outputs / "sim_macol_v6_seed1.json").read_bytes()
        b = (tmp_path / "again" / "sim_macol_v6_seed1.json").read_bytes()
        assert a == b


class TestSweepCommand:
    def test_cross_product_rows(self, tmp_path):
        cfg = write_cfg(tmp_path, FAST_SIM)
        assert main(["sweep", "--config", str(cfg), "--out",
                     str(tmp_path / "sw"), "--sweep", "vehicle_count=6,8",
                     "--seed", "1"]) == EXIT_OK
        lines = (tmp_path / "sw" / "sweep_vehicle_count.csv").read_text().strip().splitlines()
        header, rows = lines[0], lines[1:]
        assert header == "policy,axis,value,seed,metric,result"
        runs = {(r.split(",")[0], r.split(",")[2]) for r in rows}
        assert len(runs) == 6  # 2 values x 3 policies

    def test_band_sweep_emits_loss_rate(self, tmp_path):
        cfg = write_cfg(tmp_path, FAST_SIM + "interference_mode = practical\n")
        assert main(["sweep", "--config", str(cfg), "--out",
                     str(tmp_path / "sw"), "--sweep", "band_count=1,2",
                     "--seed", "1", "--policy", "best_snr"]) == EXIT_OK
        text = (tmp_path / "sw" / "sweep_band_count.csv").read_text()
        assert "loss_rate" in text

    def test_bad_axis_is_config_error(self, tmp_path):
        cfg = write_cfg(tmp_path, FAST_SIM)
        assert main(["sweep", "--config", str(cfg), "--out",
                     str(tmp_path / "sw"), "--sweep", "speed=1,2",
                     "--seed", "1"]) == EXIT_CONFIG


class TestExitCodes:
    def test_missing_config_file(self, tmp_path):
        assert main(["simulate", "--config", str(tmp_path / "nope.cfg"),
                     "--out", str(tmp_path / "o")]) == EXIT_CONFIG

    def test_range_error(self, tmp_path):
        cfg = write_cfg(tmp_path, "vehicle_count = 41\n")
        assert main(["simulate", "--config", str(cfg), "--out",
                     str(tmp_path / "o")]) == EXIT_CONFIG

    def test_bad_seed_list(self, tmp_path):
        cfg = write_cfg(tmp_path, FAST_SIM)
        assert main(["simulate", "--config", str(cfg), "--out",
                     str(tmp_path / "o"), "--seed", "one"]) == EXIT_CONFIG
