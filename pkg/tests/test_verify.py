import json
import math

import pytest

from proplab.core import OscParams
from proplab.errors import ArgumentError, ConfigurationError
from proplab.verify import SUITE, THRESHOLDS_ENV, RunConfig, load_thresholds, run_item, run_suite

# the number-basis factorisation items fail by construction (see docs/notes.md)
EXPECTED_RED = {"fock.bch", "fock.bch_trend"}


@pytest.fixture(scope="module")
def default_report():
    return run_suite(RunConfig())


class TestRunConfig:
    @pytest.mark.parametrize(
        "kw",
        [
            {"terms": 0},
            {"D": 1},
            {"D": 30, "d": 16},
            {"epsilon": 0.0},
            {"grid_min": 1.0, "grid_max": -1.0},
            {"grid_n": 1},
            {"quad_order": 2.5},
        ],
    )
    def test_rejects(self, kw):
        with pytest.raises(ConfigurationError):
            RunConfig(**kw)

    def test_echo_is_plain_data(self):
        echo = RunConfig(OscParams(2.0, 1.0, 1.0), D=40).echo()
        assert echo["params"] == {"m": 2.0, "omega": 1.0, "hbar": 1.0} and echo["D"] == 40
        json.dumps(echo)

    def test_get_default(self):
        assert RunConfig().get("D", 60) == 60 and RunConfig(D=80).get("D", 60) == 80


class TestThresholds:
    def test_packaged_covers_suite(self):
        assert set(load_thresholds()) == set(SUITE)

    def test_env_override(self, tmp_path, monkeypatch):
        path = tmp_path / "t.json"
        path.write_text(json.dumps({"thresholds": {"kernel.schrodinger": 1e-20}}))
        monkeypatch.setenv(THRESHOLDS_ENV, str(path))
        assert load_thresholds() == {"kernel.schrodinger": 1e-20}

    def test_argument_beats_env(self, tmp_path, monkeypatch):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        a.write_text(json.dumps({"x": 1}))
        b.write_text(json.dumps({"x": 2}))
        monkeypatch.setenv(THRESHOLDS_ENV, str(b))
        assert load_thresholds(str(a)) == {"x": 1.0}

    @pytest.mark.parametrize("content", ["not json", json.dumps({"thresholds": {"a": "big"}}), json.dumps([1, 2])])
    def test_bad_file(self, tmp_path, content):
        path = tmp_path / "bad.json"
        path.write_text(content)
        with pytest.raises(ConfigurationError):
            load_thresholds(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_thresholds(str(tmp_path / "absent.json"))


class TestSuite:
    def test_has_at_least_twelve_items(self):
        assert len(SUITE) >= 12

    def test_sorted_and_complete(self, default_report):
        names = [e["name"] for e in default_report]
        assert names == sorted(SUITE)

    def test_only_the_expected_items_fail(self, default_report):
        failed = {e["name"] for e in default_report if not e["passed"]}
        assert failed == EXPECTED_RED

    @pytest.mark.xfail(strict=True, reason="the number-basis factorisation residual diverges with D")
    def test_all_pass(self, default_report):
        assert all(e["passed"] for e in default_report)

    def test_values_are_reported_honestly(self, default_report):
        bch = next(e for e in default_report if e["name"] == "fock.bch")
        assert bch["value"] > 1.0 and bch["threshold"] == 1e-6

    def test_only_filter(self):
        (entry,) = run_suite(RunConfig(), ["kernel.schrodinger"])
        assert entry["name"] == "kernel.schrodinger" and entry["passed"]

    def test_unknown_item(self):
        with pytest.raises(ArgumentError):
            run_suite(RunConfig(), ["kernel.nope"])

    def test_errors_become_entries(self):
        # omega = 4 pi / 3 puts a caustic at tau = 0.75, inside the reconstruction interval [0.5, 1]
        cfg = RunConfig(OscParams(omega=4 * math.pi / 3))
        entry = run_item("kernel.phase_reconstruct", cfg, load_thresholds())
        assert entry["passed"] is False and entry["value"] is None
        assert entry["error"]["class"] == "caustic"

    def test_missing_threshold(self):
        with pytest.raises(ConfigurationError):
            run_item("kernel.schrodinger", RunConfig(), {})

    def test_overrides_reach_items(self):
        coarse = run_item("kernel.spectral_agreement", RunConfig(terms=10), load_thresholds())
        fine = run_item("kernel.spectral_agreement", RunConfig(), load_thresholds())
        assert coarse["value"] > fine["value"]
