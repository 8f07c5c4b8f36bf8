# Settings for the htron_logic toolchain
#
# Values come from an INI file (see htron_logic.cfg) and two environment variables:
#
#     HTRON_LOGIC_CONFIG     path of the INI file
#     HTRON_LOGIC_LOG_LEVEL  logging level name, e.g. DEBUG
import configparser
import dataclasses
import logging
import os
import pathlib
import typing

from htron_logic.device.csv_io import read_calibration_csv
from htron_logic.device.models import CalibrationTable, DeviceParams
from htron_logic.errors import ConfigurationError
from htron_logic.gates import LogicEncoding
from htron_logic.netlist.models import DEFAULT_SPLITTER_FANOUT
from htron_logic.simulator import DEFAULT_DT

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_NAME = "htron_logic.cfg"

LOG_FORMAT = "%(asctime)s [%(levelname)-8s] %(message)s"


def config_path_from_env() -> typing.Optional[pathlib.Path]:
    """The INI file named by HTRON_LOGIC_CONFIG, else htron_logic.cfg when present."""
    value = os.environ.get("HTRON_LOGIC_CONFIG")
    if value:
        path = pathlib.Path(value)
        if not path.is_file():
            raise ConfigurationError(f"HTRON_LOGIC_CONFIG names a missing file: '{value}'.")
        return path
    default = pathlib.Path(DEFAULT_CONFIG_NAME)
    return default if default.is_file() else None


def log_level_from_env() -> int:
    name = os.environ.get("HTRON_LOGIC_LOG_LEVEL", "INFO")
    return parse_log_level(name)


def parse_log_level(name: str) -> int:
    level = logging.getLevelName(name.strip().upper())
    if not isinstance(level, int):
        raise ConfigurationError(f"Unknown log level '{name}'.")
    return level


@dataclasses.dataclass(frozen=True)
class ToolConfig:
    params: DeviceParams = dataclasses.field(default_factory=DeviceParams)
    table: typing.Optional[CalibrationTable] = None
    """None when the configuration declares no calibration."""
    calibration_source: str = ""
    dt: float = DEFAULT_DT
    splitter_fanout: int = DEFAULT_SPLITTER_FANOUT
    enc: LogicEncoding = dataclasses.field(default_factory=LogicEncoding)
    path: typing.Optional[pathlib.Path] = None

    def require_table(self) -> CalibrationTable:
        if self.table is None:
            raise ConfigurationError(
                "No calibration: pass --calib or declare [calibration] in the config file."
            )
        return self.table


def _float(section: configparser.SectionProxy, key: str, default=None):
    raw = section.get(key)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError:
        raise ConfigurationError(
            f"[{section.name}] {key} = '{raw}' is not a number."
        ) from None


def _knots(raw: str) -> CalibrationTable:
    """Parse 'g:c, g:c, ...' pairs in μA."""
    pairs = []
    for item in raw.replace("\n", ",").split(","):
        item = item.strip()
        if not item:
            continue
        gate, sep, crit = item.partition(":")
        if not sep:
            raise ConfigurationError(f"[calibration] knot '{item}' has no ':'.")
        try:
            pairs.append((float(gate), float(crit)))
        except ValueError:
            raise ConfigurationError(
                f"[calibration] knot '{item}' must look like '<gate μA>:<critical μA>'."
            ) from None
    table = CalibrationTable.from_pairs(pairs)
    if not table.is_anchored:
        logger.warning("Synthetic calibration does not pass through 110 μA -> 55 μA.")
    return table


def _device(parser: configparser.ConfigParser) -> DeviceParams:
    if not parser.has_section("device"):
        return DeviceParams()
    section = parser["device"]
    overrides = {}
    scaled = {
        "turn_on_delay_ps": ("turn_on_delay", 1e12),
        "reset_time_ns": ("reset_time", 1e9),
        "r_normal_ohm": ("r_normal", 1.0),
        "r_gate_ohm": ("r_gate", 1.0),
        "critical_temperature_k": ("critical_temperature", 1.0),
        "operating_temperature_k": ("operating_temperature", 1.0),
    }
    for key, (field, per_unit) in scaled.items():
        value = _float(section, key)
        if value is not None:
            overrides[field] = value / per_unit
    unknown = set(section) - set(scaled) - {"preset"} - set(parser.defaults())
    if unknown:
        raise ConfigurationError(f"[device] has unknown key(s) {', '.join(sorted(unknown))}.")
    return DeviceParams.preset(section.get("preset", "wsi").strip(), **overrides)


def _calibration(
    parser: configparser.ConfigParser, base: pathlib.Path
) -> tuple[typing.Optional[CalibrationTable], str]:
    if not parser.has_section("calibration"):
        return None, ""
    section = parser["calibration"]
    csv_path = section.get("csv")
    if csv_path:
        path = pathlib.Path(csv_path)
        if not path.is_absolute():
            path = base / path
        if not path.is_file():
            raise ConfigurationError(f"[calibration] csv file '{path}' does not exist.")
        return read_calibration_csv(path), str(path)
    try:
        synthetic = section.getboolean("synthetic", fallback=False)
    except ValueError:
        raise ConfigurationError("[calibration] synthetic must be true or false.") from None
    if synthetic:
        raw = section.get("knots")
        if not raw:
            raise ConfigurationError("[calibration] synthetic = true needs 'knots'.")
        return _knots(raw), "synthetic"
    raise ConfigurationError("[calibration] needs either 'csv' or 'synthetic = true'.")


def load_config(file_path: typing.Union[str, pathlib.Path, None] = None) -> ToolConfig:
    """Read the INI configuration; without a file every setting takes its default."""
    if file_path is None:
        return ToolConfig()

    path = pathlib.Path(file_path)
    parser = configparser.ConfigParser()
    try:
        with open(path, "rt", encoding="utf-8") as f:
            parser.read_file(f)
    except OSError as e:
        raise ConfigurationError(f"Cannot read config file '{path}': {e}") from e
    except configparser.Error as e:
        raise ConfigurationError(f"Config file '{path}': {e}") from e

    params = _device(parser)
    table, source = _calibration(parser, path.parent)

    dt = DEFAULT_DT
    fanout = DEFAULT_SPLITTER_FANOUT
    if parser.has_section("simulation"):
        section = parser["simulation"]
        dt_ps = _float(section, "dt_ps")
        if dt_ps is not None:
            dt = dt_ps / 1e12
        fanout_value = _float(section, "splitter_fanout", fanout)
        if fanout_value != int(fanout_value) or fanout_value < 2:
            raise ConfigurationError("[simulation] splitter_fanout must be an integer >= 2.")
        fanout = int(fanout_value)

    enc = LogicEncoding()
    if parser.has_section("encoding"):
        section = parser["encoding"]
        enc = LogicEncoding(
            i_zero=_float(section, "i_zero_ua", 0.0),
            i_one=_float(section, "i_one_ua", 55.0),
            detect_threshold=_float(section, "detect_threshold_ua"),
        )

    config = ToolConfig(
        params=params,
        table=table,
        calibration_source=source,
        dt=dt,
        splitter_fanout=fanout,
        enc=enc,
        path=path,
    )
    logger.debug("Loaded configuration from '%s'.", path)
    return config
