import contextlib
import logging
import os
import pathlib
import tempfile
import typing

import chardet

logger = logging.getLogger(__name__)


def read_text(file_path: typing.Union[str, pathlib.Path]) -> str:
    """Read a text file, falling back to a detected encoding when it is not UTF-8."""
    with open(file_path, "rb") as f:
        raw = f.read()

    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        encoding_detected = chardet.detect(raw)
        encoding = encoding_detected.get("encoding") or "latin-1"
        logger.warning(
            "File '%s' is not UTF-8, decoding as %s (confidence %.2f).",
            file_path,
            encoding,
            encoding_detected.get("confidence") or 0.0,
        )
        text = raw.decode(encoding, errors="replace")

    # normalise line endings
    return text.lstrip("\ufeff").replace("\r\n", "\n").replace("\r", "\n")


@contextlib.contextmanager
def atomic_writer(file_path: typing.Union[str, pathlib.Path]):
    """Open a temporary file next to the target and move it into place on success."""
    target = pathlib.Path(file_path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(
        prefix=f".{target.name}.", suffix=".tmp", dir=target.parent
    )
    try:
        with os.fdopen(fd, "wt", newline="", encoding="utf-8") as f:
            yield f
        os.replace(tmp_name, target)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp_name)
        raise


def write_text(file_path: typing.Union[str, pathlib.Path], text: str) -> None:
    with atomic_writer(file_path) as f:
        f.write(text)


def format_number(value: float) -> str:
    """Shortest text that reads back to the same float; integers without a fraction."""
    value = float(value)
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)
