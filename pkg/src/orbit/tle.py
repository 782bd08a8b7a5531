"""
Two-line element (TLE) reader.
Mean elements are used as osculating two-body elements (no SGP4, no Brouwer conversion).
"""

from __future__ import annotations

import string
from datetime import datetime, timedelta, timezone
from typing import Iterable

import numpy as np

from src.errors import TleFormatError
from src.orbit.constants import MU_EARTH, SECONDS_PER_DAY
from src.orbit.epoch import Epoch
from src.orbit.propagator import OrbitalElements
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

TLE_LINE_LENGTH = 69


def line_checksum(line: str) -> int:
    """Modulo-10 checksum over the first 68 columns: digits count their value, '-' counts 1."""
    total = 0
    for c in line[:68]:
        if c in string.digits:
            total += int(c)
        elif c == "-":
            total += 1
    return total % 10


def semi_major_axis_from_mean_motion(revs_per_day: float) -> float:
    n = revs_per_day * 2.0 * np.pi / SECONDS_PER_DAY
    return float((MU_EARTH / n**2) ** (1.0 / 3.0))


def _epoch_from_fields(year_field: str, day_field: str) -> Epoch:
    year = int(year_field)
    year += 2000 if year < 57 else 1900
    start = datetime(year, 1, 1, tzinfo=timezone.utc)
    return Epoch.from_datetime(start + timedelta(days=float(day_field) - 1.0))


def _check_line(line: str, expected: str, line_number: int, records: list) -> None:
    if len(line) != TLE_LINE_LENGTH:
        raise TleFormatError(f"line has {len(line)} characters, expected {TLE_LINE_LENGTH}", line_number, records)
    if line[0] != expected:
        raise TleFormatError(f"expected line {expected} of a TLE record", line_number, records)
    if not line[68].isdigit() or line_checksum(line) != int(line[68]):
        raise TleFormatError(
            f"checksum mismatch (computed {line_checksum(line)}, found '{line[68]}')", line_number, records
        )


def _decode(line1: str, line2: str, line_number: int, records: list) -> OrbitalElements:
    """Decodes a validated pair; ``line_number`` refers to line 2."""
    try:
        epoch = _epoch_from_fields(line1[18:20], line1[20:32])
        inclination = np.deg2rad(float(line2[8:16]))
        raan = np.deg2rad(float(line2[17:25]))
        eccentricity = float("0." + line2[26:33].strip())
        arg_perigee = np.deg2rad(float(line2[34:42]))
        mean_anomaly = np.deg2rad(float(line2[43:51]))
        revs_per_day = float(line2[52:63])
    except ValueError as exc:
        raise TleFormatError(f"unparsable numeric field ({exc})", line_number, records) from exc

    if revs_per_day <= 0.0:
        raise TleFormatError(f"non-positive mean motion {revs_per_day}", line_number, records)

    return OrbitalElements(
        semi_major_axis=semi_major_axis_from_mean_motion(revs_per_day),
        inclination=inclination,
        raan=raan,
        arg_latitude_at_epoch=arg_perigee + mean_anomaly,
        epoch=epoch,
        eccentricity=eccentricity,
        arg_perigee=arg_perigee,
    )


def parse_tle(text: str | Iterable[str]) -> list[OrbitalElements]:
    """
    Parses zero or more 2-line or 3-line (named) TLE records.

    :param text: str | Iterable[str] -- Whole file content or an iterable of lines
    :return: list of OrbitalElements in file order
    :raises TleFormatError: on the first bad record; ``err.records`` holds those parsed before it
    """
    lines = text.splitlines() if isinstance(text, str) else [line.rstrip("\r\n") for line in text]
    numbered = [(i + 1, line.rstrip()) for i, line in enumerate(lines) if line.strip()]

    records: list[OrbitalElements] = []
    k = 0
    while k < len(numbered):
        number, line = numbered[k]
        if not line.startswith("1 "):
            if line.startswith("2 "):
                raise TleFormatError("line 2 without a preceding line 1", number, records)
            # Title line of a 3-line record
            k += 1
            if k >= len(numbered):
                raise TleFormatError("title line without element lines", number, records)
            number, line = numbered[k]

        if k + 1 >= len(numbered):
            raise TleFormatError("line 1 without a following line 2", number, records)
        number2, line2 = numbered[k + 1]

        _check_line(line, "1", number, records)
        _check_line(line2, "2", number2, records)
        if line[2:7] != line2[2:7]:
            raise TleFormatError(
                f"catalog number mismatch between lines ('{line[2:7]}' vs '{line2[2:7]}')", number2, records
            )
        records.append(_decode(line, line2, number2, records))
        k += 2

    logger.debug(f"Parsed {len(records)} TLE record(s).")
    return records


def load_tle_file(path: str) -> list[OrbitalElements]:
    try:
        with open(path, "r") as tle_file:
            logger.info(f"Loading TLE file at '{path}' ...")
            return parse_tle(tle_file.read())
    except FileNotFoundError:
        raise FileNotFoundError(f"File {path} not found!")
