import csv
import io
import logging
import pathlib
import typing

from htron_logic import textio
from htron_logic.device.models import CalibrationTable, SwitchingSampleSet
from htron_logic.errors import CsvFormatError

logger = logging.getLogger(__name__)

CALIBRATION_FIELDS = ["i_gate_uA", "i_ch_crit_uA"]
SAMPLE_FIELDS = ["i_gate_uA", "sample_uA"]

PathLike = typing.Union[str, pathlib.Path]


def _read_rows(file_path: PathLike, fields: list[str]) -> list[tuple[int, dict]]:
    text = textio.read_text(file_path)
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise CsvFormatError(f"{file_path}: file is empty.")

    header = [h.strip() for h in reader.fieldnames]
    missing = [f for f in fields if f not in header]
    if missing:
        raise CsvFormatError(
            f"{file_path}: header must contain {','.join(fields)}, found {','.join(header)}."
        )

    rows = []
    for row in reader:
        row = {k.strip(): (v or "").strip() for k, v in row.items() if k is not None}
        if not any(row.values()):
            continue
        rows.append((reader.line_num, row))
    return rows


def _number(file_path: PathLike, line: int, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise CsvFormatError(
            f"{file_path}: line {line}: '{value}' is not a number."
        ) from None


def read_calibration_csv(file_path: PathLike) -> CalibrationTable:
    knots = []
    for line, row in _read_rows(file_path, CALIBRATION_FIELDS):
        knots.append(
            (
                _number(file_path, line, row["i_gate_uA"]),
                _number(file_path, line, row["i_ch_crit_uA"]),
            )
        )
    table = CalibrationTable.from_pairs(knots)
    logger.info("Read %d calibration knots from '%s'.", len(table.knots), file_path)
    if not table.is_anchored:
        logger.warning("Calibration table does not pass through 110 μA -> 55 μA.")
    return table


def read_samples_csv(file_path: PathLike) -> SwitchingSampleSet:
    data: dict[float, list[float]] = {}
    for line, row in _read_rows(file_path, SAMPLE_FIELDS):
        i_gate = _number(file_path, line, row["i_gate_uA"])
        sample = _number(file_path, line, row["sample_uA"])
        data.setdefault(i_gate, []).append(sample)

    samples = SwitchingSampleSet.from_mapping(data)
    logger.info(
        "Read %d samples at %d gate currents from '%s'.",
        sum(len(v) for _, v in samples.points),
        len(samples.points),
        file_path,
    )
    single = [g for g, v in samples.points if len(v) == 1]
    if single:
        logger.warning(
            "%d gate currents in '%s' have a single sample, first at %s μA.",
            len(single),
            file_path,
            textio.format_number(single[0]),
        )
    return samples


def _write_calibration(f: typing.TextIO, table: CalibrationTable) -> None:
    writer = csv.DictWriter(f, CALIBRATION_FIELDS, lineterminator="\n")
    writer.writeheader()
    for i_gate, i_crit in table.knots:
        writer.writerow(
            {
                "i_gate_uA": textio.format_number(i_gate),
                "i_ch_crit_uA": textio.format_number(i_crit),
            }
        )


def render_calibration_csv(table: CalibrationTable) -> str:
    buffer = io.StringIO()
    _write_calibration(buffer, table)
    return buffer.getvalue()


def write_calibration_csv(file_path: PathLike, table: CalibrationTable) -> None:
    with textio.atomic_writer(file_path) as f:
        _write_calibration(f, table)


def write_samples_csv(file_path: PathLike, samples: SwitchingSampleSet) -> None:
    with textio.atomic_writer(file_path) as f:
        writer = csv.DictWriter(f, SAMPLE_FIELDS, lineterminator="\n")
        writer.writeheader()
        for i_gate, values in samples.points:
            for value in values:
                writer.writerow(
                    {
                        "i_gate_uA": textio.format_number(i_gate),
                        "sample_uA": textio.format_number(value),
                    }
                )
