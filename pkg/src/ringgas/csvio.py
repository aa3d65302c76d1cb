"""CSV writing/reading with the package's dialect.

Comma separated, '.' decimals, UTF-8, LF line endings. Floats are written
with ``repr`` so values round-trip exactly; complex numbers are written as
``a+bi``. Each command's header is fixed and doubles as its schema version.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Sequence

from .errors import ConfigError

def format_complex(z: complex) -> str:
    z = complex(z)
    sign = "-" if z.imag < 0 or (z.imag == 0 and str(z.imag).startswith("-")) else "+"
    return f"{z.real!r}{sign}{abs(z.imag)!r}i"


def parse_complex(text: str) -> complex:
    """Parse ``a+bi``, ``a-bi``, ``bi``, ``a`` (``j`` accepted for ``i``)."""
    s = text.strip().replace(" ", "").replace("j", "i")
    if not s:
        raise ConfigError("empty complex number")
    try:
        return complex(s.replace("i", "j"))
    except ValueError:
        pass
    if s.endswith("i"):
        body = s[:-1]
        # "1+i" or "-i" forms with implicit unit
        if body in ("", "+", "-"):
            return complex(0, -1 if body == "-" else 1)
        if body[-1] in "+-":
            try:
                return complex(float(body[:-1]), -1.0 if body[-1] == "-" else 1.0)
            except ValueError:
                pass
    raise ConfigError(f"cannot parse complex number {text!r}")


def format_value(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, complex):
        return format_complex(v)
    if isinstance(v, float):
        return repr(float(v))
    if hasattr(v, "item"):
        return format_value(v.item())
    return str(v)


def write_csv(header: Sequence[str], rows: Iterable[Sequence[Any]], stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])


def to_csv_string(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    write_csv(header, rows, buf)
    return buf.getvalue()


@dataclass
class CsvTable:
    header: list[str]
    rows: list[dict[str, str]]

    def column(self, name: str, cast=float) -> list:
        return [cast(r[name]) for r in self.rows]


def read_csv(source: str | Path | io.TextIOBase) -> CsvTable:
    """Read a path, an open stream, or CSV text (any string containing a newline)."""
    if isinstance(source, str) and "\n" in source:
        text = source
    elif isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source.read()
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ConfigError("empty CSV input") from None
    rows = []
    for line in reader:
        if len(line) != len(header):
            raise ConfigError(f"CSV row has {len(line)} fields, header has {len(header)}")
        rows.append(dict(zip(header, line)))
    return CsvTable(header, rows)
