"""CSV result tables with a commented metadata header.

File layout::

    # lwqed-result: 1
    # <key>: <json value>          (one line per metadata entry, sorted)
    col1,col2,...
    ...rows...
    # verdict: PASS
    # <key>: <json value>          (footer entries)

Floats are written with ``repr`` so they round-trip exactly.  The volatile
metadata keys (``timestamp``) live in the header only, so two runs with the
same config produce identical data rows and footers.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..errors import ConfigurationError

__all__ = ["ResultTable", "write_table", "read_table", "format_cell", "VOLATILE_KEYS"]

MAGIC = "# lwqed-result: 1"
VOLATILE_KEYS = ("timestamp",)


def format_cell(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int,)):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if hasattr(v, "item"):  # numpy scalars
        return format_cell(v.item())
    return str(v)


def _parse_cell(s: str) -> Any:
    if s == "true":
        return True
    if s == "false":
        return False
    if s in ("nan", "inf", "-inf"):
        return float(s)
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "tolist"):
        return _jsonable(v.tolist())
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    verdict: bool | None = None
    footer: dict = field(default_factory=dict)

    def add(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} cells, table has {len(self.columns)} columns")
        self.rows.append(list(values))

    def column(self, name: str) -> list:
        j = self.columns.index(name)
        return [r[j] for r in self.rows]

    @property
    def verdict_text(self) -> str:
        return "PASS" if self.verdict else "FAIL"

    def data_section(self) -> str:
        """Everything except the header metadata; identical across reruns."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([format_cell(c) for c in r])
        buf.write(f"# verdict: {self.verdict_text}\n")
        for k in sorted(self.footer):
            buf.write(f"# {k}: {json.dumps(_jsonable(self.footer[k]), sort_keys=True)}\n")
        return buf.getvalue()

    def to_text(self) -> str:
        lines = [MAGIC]
        for k in sorted(self.metadata):
            lines.append(f"# {k}: {json.dumps(_jsonable(self.metadata[k]), sort_keys=True)}")
        return "\n".join(lines) + "\n" + self.data_section()


def write_table(table: ResultTable, path: str | Path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(table.to_text(), encoding="utf-8")
    return p


def read_table(path: str | Path) -> ResultTable:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or lines[0] != MAGIC:
        raise ConfigurationError(f"{path}: not an lwqed result file")
    meta: dict = {}
    footer: dict = {}
    verdict = None
    body: list[str] = []
    seen_body = False
    for line in lines[1:]:
        if line.startswith("# "):
            key, _, raw = line[2:].partition(": ")
            if key == "verdict":
                verdict = raw.strip() == "PASS"
                continue
            (footer if seen_body else meta)[key] = json.loads(raw)
        else:
            seen_body = True
            body.append(line)
    reader = csv.reader(body)
    columns = next(reader)
    rows = [[_parse_cell(c) for c in r] for r in reader]
    for r in rows:
        if len(r) != len(columns):
            raise ConfigurationError(f"{path}: inconsistent column count")
    return ResultTable(columns, rows, meta, verdict, footer)
