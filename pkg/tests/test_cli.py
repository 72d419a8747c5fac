import hashlib
import json

import pytest

from besselbridges import cli
from besselbridges.config import ConfigError, load_config, validate


def _write(tmp_path, name, cfg):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def _sha(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


MEASURE_ZERO = {"atoms": [], "density": {"breaks": [0.0, 1.0], "values": [0.0]}}
MEASURE_ATOM = {"atoms": [[0.5, 1.0]],
                "density": {"breaks": [0.0, 1.0], "values": [0.0]}}


class TestConfigValidation:
    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown key"):
            validate({"command": "verify_mu", "bogus": 1}, "verify_mu")

    def test_nested_unknown_key_rejected(self):
        cfg = {"command": "verify_ibpf", "deltas": [2.0],
               "functionals": [{"id": "one", "terms": [
                   {"coeff": 1.0, "measure": MEASURE_ZERO, "extra": 2}]}],
               "test_functions": [{"id": "p", "h": {"family": "poly",
                                                    "params": [1.0]}}]}
        with pytest.raises(ConfigError, match="unknown key"):
            validate(cfg, "verify_ibpf")

    def test_command_mismatch(self):
        with pytest.raises(ConfigError, match="declares command"):
            validate({"command": "sample"}, "verify_mu")

    def test_bad_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        with pytest.raises(ConfigError):
            load_config(str(p), "verify_mu")


class TestVerifyMuCommand:
    def test_default_run_passes(self, tmp_path):
        cfg = _write(tmp_path, "mu.json", {
            "command": "verify_mu",
            "alphas": [-1.5, -1.0, 0.0, 0.5, 2.0],
            "lambdas": [0.5, 2.0],
            "tolerance": 1e-8,
        })
        rc = cli.main(["verify-mu", "--config", cfg,
                       "--out", str(tmp_path / "out")])
        assert rc == 0
        text = (tmp_path / "out" / "mu_report.csv").read_text()
        assert text.splitlines()[0] == \
            "check,alpha,param,value,target,residual,tolerance,status"

    def test_pole_guard_skip_row(self, tmp_path):
        cfg = _write(tmp_path, "mu.json", {
            "command": "verify_mu",
            "alphas": [-1.0000000001],
            "lambdas": [1.0],
        })
        rc = cli.main(["verify-mu", "--config", cfg,
                       "--out", str(tmp_path / "out")])
        assert rc == 0
        assert "skipped: alpha inside pole guard band" in (
            tmp_path / "out" / "mu_report.csv").read_text()

    def test_empty_alpha_list_is_usage_error(self, tmp_path):
        cfg = _write(tmp_path, "mu.json",
                     {"command": "verify_mu", "alphas": []})
        rc = cli.main(["verify-mu", "--config", cfg,
                       "--out", str(tmp_path / "out")])
        assert rc == 2


class TestVerifyIbpfCommand:
    def test_small_grid(self, tmp_path):
        cfg = _write(tmp_path, "ibpf.json", {
            "command": "verify_ibpf",
            "seed": 5,
            "deltas": [1.0, 2.0, 3.0],
            "functionals": [
                {"id": "one", "terms": [{"coeff": 1.0, "measure": MEASURE_ZERO}]},
                {"id": "atom", "terms": [{"coeff": 1.0, "measure": MEASURE_ATOM}]},
            ],
            "test_functions": [
                {"id": "poly", "h": {"family": "poly", "params": [1.0]}}],
            "tolerances": {"route": 1e-6, "mc_sigmas": 3.0},
        })
        out = tmp_path / "out"
        rc = cli.main(["verify-ibpf", "--config", cfg, "--out", str(out)])
        assert rc == 0
        lines = (out / "ibpf_report.csv").read_text().splitlines()
        assert lines[0] == ("delta,phi_id,h_id,route,value,se_or_tol,"
                            "residual_vs_lhs_closed")
        # delta = 2 rows must not contain the unified route
        d2 = [ln for ln in lines if ln.startswith("2.0")]
        assert d2 and all("rhs_unified" not in ln for ln in d2)
        assert any("rhs_quadrature" in ln for ln in d2)

    def test_bad_h_family(self, tmp_path):
        cfg = _write(tmp_path, "ibpf.json", {
            "command": "verify_ibpf",
            "deltas": [2.0],
            "functionals": [
                {"id": "one", "terms": [{"coeff": 1.0, "measure": MEASURE_ZERO}]}],
            "test_functions": [
                {"id": "x", "h": {"family": "wavelet", "params": []}}],
        })
        rc = cli.main(["verify-ibpf", "--config", cfg,
                       "--out", str(tmp_path / "out")])
        assert rc == 2


class TestSampleCommand:
    BASE = {
        "command": "sample",
        "seed": 99,
        "deltas": [1.0],
        "marginal_times": [0.5],
        "n_paths": 4000,
        "grid_points": 32,
        "additivity_pairs": [],
        "expectations": [],
        "dump_paths": {"enabled": True, "n_paths": 3},
    }

    def test_outputs_and_reproducibility(self, tmp_path):
        cfg = _write(tmp_path, "s.json", self.BASE)
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        rc1 = cli.main(["sample", "--config", cfg, "--out", str(out1)])
        rc2 = cli.main(["sample", "--config", cfg, "--out", str(out2)])
        assert rc1 == rc2
        for name in ("ks_table.csv", "paths.csv"):
            assert _sha(out1 / name) == _sha(out2 / name)
        header = (out1 / "paths.csv").read_text().splitlines()[0]
        assert header == "path_id,t,value"

    def test_seed_override_changes_output(self, tmp_path):
        cfg = _write(tmp_path, "s.json", self.BASE)
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        cli.main(["sample", "--config", cfg, "--out", str(out1)])
        cli.main(["sample", "--config", cfg, "--out", str(out2),
                  "--seed", "123456"])
        assert _sha(out1 / "ks_table.csv") != _sha(out2 / "ks_table.csv")

    def test_zero_paths_rejected(self, tmp_path):
        bad = dict(self.BASE, n_paths=0)
        cfg = _write(tmp_path, "s.json", bad)
        rc = cli.main(["sample", "--config", cfg,
                       "--out", str(tmp_path / "out")])
        assert rc == 2


class TestSpdeCommand:
    BASE = {
        "command": "spde",
        "seed": 7,
        "m_interior": 31,
        "eps": 0.2,
        "dt": 1e-4,
        "t_final": 0.1,
        "replicas": 2,
        "burn_in": 0.05,
        "record_stride": 50,
        "probe_x": 0.5,
        "drift": False,
        "ks_tolerance": 0.9,
    }

    def test_control_run_and_outputs(self, tmp_path):
        cfg = _write(tmp_path, "spde.json", self.BASE)
        out = tmp_path / "out"
        rc = cli.main(["spde", "--config", cfg, "--out", str(out)])
        assert rc == 0
        assert (out / "trajectory.csv").read_text().splitlines()[0] == \
            "replica,t,x,u"
        assert "pass" in (out / "stationarity.csv").read_text()

    def test_drift_run(self, tmp_path):
        cfg = _write(tmp_path, "spde.json", dict(self.BASE, drift=True))
        rc = cli.main(["spde", "--config", cfg,
                       "--out", str(tmp_path / "out")])
        assert rc in (0, 1)  # statistical outcome; command must complete

    def test_stability_refusal(self, tmp_path):
        cfg = _write(tmp_path, "spde.json", dict(self.BASE, dt=1e-2))
        rc = cli.main(["spde", "--config", cfg,
                       "--out", str(tmp_path / "out")])
        assert rc == 2

    def test_reproducible(self, tmp_path):
        cfg = _write(tmp_path, "spde.json", self.BASE)
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        cli.main(["spde", "--config", cfg, "--out", str(out1)])
        cli.main(["spde", "--config", cfg, "--out", str(out2)])
        assert _sha(out1 / "trajectory.csv") == _sha(out2 / "trajectory.csv")


class TestDistinctionCommand:
    def test_default_sources(self, tmp_path):
        cfg = _write(tmp_path, "d.json", {
            "command": "distinction",
            "sources": [{"id": "sin1", "kind": "sin", "amplitudes": [1.0]},
                        {"id": "zero", "kind": "zero"}],
            "h": {"family": "bump", "params": [0.3, 0.7]},
        })
        out = tmp_path / "out"
        rc = cli.main(["distinction", "--config", cfg, "--out", str(out)])
        assert rc == 0
        text = (out / "distinction.csv").read_text()
        assert text.splitlines()[0] == \
            "k_id,h_id,J,L,gap,relation_residual_at_half,status"

    def test_malformed_source(self, tmp_path):
        cfg = _write(tmp_path, "d.json", {
            "command": "distinction",
            "sources": [{"id": "x", "kind": "chirp"}],
        })
        rc = cli.main(["distinction", "--config", cfg,
                       "--out", str(tmp_path / "out")])
        assert rc == 2
