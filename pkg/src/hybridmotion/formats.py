"""CSV readers and writers for traces, Bode data and FRF samples."""

from __future__ import annotations

import csv
import io
import math
from typing import Iterable, Sequence, TextIO

from .analysis import FrequencySample
from .simcore import TRACE_FIELDS, TraceRecord

BODE_HEADER = ("omega", "magnitude", "mag_db", "phase_rad")


class FormatError(ValueError):
    pass


def _num(x: float) -> str:
    return repr(float(x))


def write_trace_csv(records: Iterable[TraceRecord], fh: TextIO) -> None:
    fh.write(",".join(TRACE_FIELDS) + "\n")
    for rec in records:
        fh.write(
            f"{_num(rec.t)},{_num(rec.r)},{_num(rec.x_true)},{_num(rec.x_meas)},{_num(rec.u)},"
            f"{_num(rec.v_input)},{_num(rec.F_env)},{int(rec.mode)},{int(bool(rec.sat_active))}\n"
        )


def trace_csv_text(records: Iterable[TraceRecord]) -> str:
    buf = io.StringIO()
    write_trace_csv(records, buf)
    return buf.getvalue()


def write_bode_csv(samples: Sequence[FrequencySample], fh: TextIO) -> None:
    fh.write(",".join(BODE_HEADER) + "\n")
    for smp in samples:
        mag_db = 20.0 * math.log10(smp.magnitude) if smp.magnitude > 0 else -math.inf
        fh.write(f"{_num(smp.omega)},{_num(smp.magnitude)},{_num(mag_db)},{_num(smp.phase)}\n")


def read_frf_csv(fh: TextIO) -> list[FrequencySample]:
    """Read ``omega,magnitude[,mag_db][,phase_rad]`` rows.

    The header row is optional; without it the columns are taken in the
    Bode order.  Errors name the offending line.
    """
    reader = csv.reader(fh)
    rows = [(i, row) for i, row in enumerate(reader, start=1) if row and any(c.strip() for c in row)]
    if not rows:
        return []
    columns = list(BODE_HEADER)
    first_line, first = rows[0]
    if first[0].strip().lower() == "omega":
        columns = [c.strip().lower() for c in first]
        rows = rows[1:]
        if "magnitude" not in columns and "mag_db" not in columns:
            raise FormatError(f"line {first_line}: need a magnitude or mag_db column")
    samples = []
    for line, row in rows:
        if len(row) < 2 or len(row) > len(columns):
            raise FormatError(f"line {line}: expected 2 to {len(columns)} fields, got {len(row)}")
        try:
            values = {name: float(cell) for name, cell in zip(columns, row) if cell.strip()}
        except ValueError as exc:
            raise FormatError(f"line {line}: {exc}") from None
        if "omega" not in values:
            raise FormatError(f"line {line}: missing omega")
        if "magnitude" in values:
            mag = values["magnitude"]
        elif "mag_db" in values:
            mag = 10.0 ** (values["mag_db"] / 20.0)
        else:
            raise FormatError(f"line {line}: missing magnitude")
        try:
            samples.append(FrequencySample(values["omega"], mag, values.get("phase_rad", math.nan)))
        except ValueError as exc:
            raise FormatError(f"line {line}: {exc}") from None
    return samples


def format_summary(summary: dict) -> str:
    lines = []
    for key, value in summary.items():
        text = repr(float(value)) if isinstance(value, float) else str(value)
        lines.append(f"{key}={text}")
    return "\n".join(lines) + "\n"
