import logging

import pytest

from htron_logic import settings
from htron_logic.device.models import CalibrationTable, DeviceParams
from htron_logic.errors import ConfigurationError

from conftest import SHIPPED_CONFIG


def _write(tmp_path, text: str):
    path = tmp_path / "tool.cfg"
    path.write_text(text)
    return path


def test_shipped_config():
    config = settings.load_config(SHIPPED_CONFIG)
    assert config.params == DeviceParams()
    assert config.require_table() == CalibrationTable(((110.0, 55.0), (135.0, 30.0)))
    assert config.calibration_source == "synthetic"
    assert config.dt == 50e-12
    assert config.splitter_fanout == 2
    assert config.enc.detect_threshold == 27.5


def test_no_file_gives_defaults():
    config = settings.load_config(None)
    assert config.table is None
    assert config.params == DeviceParams()
    with pytest.raises(ConfigurationError, match="--calib"):
        config.require_table()


def test_calibration_csv_is_relative_to_the_config(tmp_path):
    (tmp_path / "calib.csv").write_text("i_gate_uA,i_ch_crit_uA\n0,165\n160,5\n")
    config = settings.load_config(_write(tmp_path, "[calibration]\ncsv = calib.csv\n"))
    assert config.table.knots == ((0.0, 165.0), (160.0, 5.0))
    assert config.calibration_source == str(tmp_path / "calib.csv")


def test_device_preset_with_override(tmp_path):
    config = settings.load_config(_write(tmp_path, "[device]\npreset = nbn\nturn_on_delay_ps = 200\n"))
    assert config.params.reset_time == 1e-9
    assert config.params.turn_on_delay == pytest.approx(200e-12)


@pytest.mark.parametrize(
    "text, message",
    [
        ("[device]\nreset_time_ns = fast\n", "not a number"),
        ("[device]\ncolour = blue\n", "unknown key"),
        ("[device]\npreset = unobtainium\n", "preset"),
        ("[calibration]\ncsv = missing.csv\n", "does not exist"),
        ("[calibration]\nsynthetic = true\n", "knots"),
        ("[calibration]\nsynthetic = true\nknots = 110-55\n", "no ':'"),
        ("[calibration]\nsynthetic = true\nknots = 110:x\n", "<gate"),
        ("[calibration]\nsynthetic = maybe\n", "true or false"),
        ("[calibration]\n", "either"),
        ("[simulation]\nsplitter_fanout = 1\n", "splitter_fanout"),
        ("[encoding]\ni_one_ua = 0\n", "i_zero < detect_threshold"),
        ("no section header\n", "Config file"),
    ],
)
def test_bad_config_files(tmp_path, text, message):
    with pytest.raises(ConfigurationError, match=message):
        settings.load_config(_write(tmp_path, text))


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigurationError, match="Cannot read"):
        settings.load_config(tmp_path / "absent.cfg")


def test_config_path_from_env(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("HTRON_LOGIC_CONFIG", raising=False)
    assert settings.config_path_from_env() is None

    (tmp_path / settings.DEFAULT_CONFIG_NAME).write_text("")
    assert settings.config_path_from_env().name == settings.DEFAULT_CONFIG_NAME

    monkeypatch.setenv("HTRON_LOGIC_CONFIG", str(tmp_path / "other.cfg"))
    with pytest.raises(ConfigurationError, match="missing file"):
        settings.config_path_from_env()


def test_log_levels(monkeypatch):
    assert settings.parse_log_level("debug") == logging.DEBUG
    with pytest.raises(ConfigurationError):
        settings.parse_log_level("chatty")

    monkeypatch.setenv("HTRON_LOGIC_LOG_LEVEL", "warning")
    assert settings.log_level_from_env() == logging.WARNING


def test_unanchored_synthetic_table_is_reported(tmp_path, caplog):
    with caplog.at_level(logging.WARNING, logger="htron_logic"):
        settings.load_config(SHIPPED_CONFIG)
    assert "110 μA -> 55 μA" not in caplog.text

    with caplog.at_level(logging.WARNING, logger="htron_logic"):
        config = settings.load_config(_write(tmp_path, "[calibration]\nsynthetic = true\nknots = 0:100, 200:10\n"))
    assert config.table.knots == ((0.0, 100.0), (200.0, 10.0))
    assert "110 μA -> 55 μA" in caplog.text
