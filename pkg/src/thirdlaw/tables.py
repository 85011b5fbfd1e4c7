"""CSV serialisation shared by the trace, harness and ensemble writers.

Numbers are written with 17 significant digits so that a float survives a
round trip exactly; files are UTF-8 with LF line endings and a header row.
"""
from __future__ import annotations

import csv
import io
import math
from pathlib import Path


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def fmt_temperature(temperature, log_temperature=None) -> str:
    """Temperature text; values below the double range are rebuilt from their logarithm."""
    if temperature is None:
        return ""
    if temperature == 0.0 and log_temperature is not None and math.isfinite(log_temperature):
        decimal_log = log_temperature / math.log(10.0)
        exponent = math.floor(decimal_log)
        mantissa = 10.0 ** (decimal_log - exponent)
        return f"{mantissa:.12f}e{exponent}"
    return fmt(float(temperature))


def csv_text(header, rows) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([cell if isinstance(cell, str) else fmt(cell) for cell in row])
    return buffer.getvalue()


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text(header, rows))
    return path
