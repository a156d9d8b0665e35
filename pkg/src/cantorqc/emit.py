"""Deterministic CSV / text emitters and the flat ``key = value`` config format."""

from __future__ import annotations

import csv
import io
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Iterable, TextIO

THREADS_ENV = "CANTOR_QC_THREADS"


def fmt(v) -> str:
    """17 significant digits for floats; ints and strings verbatim."""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, complex):
        return f"{v.real:.17g}{v.imag:+.17g}j"
    if v is None:
        return ""
    return str(v)


def write_csv(header: Iterable[str], rows: Iterable[Iterable], dest: str | Path | TextIO | None = None) -> str:
    """Write rows as CSV (``\\n`` line endings); returns the text as well."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(header))
    for row in rows:
        w.writerow([fmt(v) for v in row])
    text = buf.getvalue()
    if dest is None:
        return text
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        Path(dest).write_text(text, encoding="utf-8")
    return text


def read_points(stream: TextIO) -> list[complex]:
    """Points as CSV lines ``x,y``; blank lines, ``#`` comments and a header are skipped."""
    pts = []
    for line in stream:
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        try:
            x, y = float(parts[0]), float(parts[1])
        except (ValueError, IndexError):
            if not pts:  # header line
                continue
            raise ValueError(f"bad point line: {line!r}")
        pts.append(complex(x, y))
    return pts


def parse_config(path: str | Path) -> dict[str, str]:
    """Flat ``key = value`` lines, UTF-8, ``#`` comments, no nesting."""
    out = {}
    for n, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{n}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ValueError(f"{path}:{n}: empty key")
        out[key.replace("-", "_")] = value
    return out


def parse_real(text) -> float:
    """Decimal or rational ``p/q`` text to float."""
    if isinstance(text, (int, float)):
        return float(text)
    return float(Fraction(str(text).strip()))


def worker_count(default: int | None = None) -> int:
    """Worker cap from CANTOR_QC_THREADS (>= 1), else ``default`` or cpu count."""
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return default or os.cpu_count() or 1


def open_out(path: str | None) -> TextIO:
    if path in (None, "-"):
        return sys.stdout
    return open(path, "w", encoding="utf-8", newline="")
