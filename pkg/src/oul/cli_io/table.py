"""Column tables written as CSV with ``#``-prefixed metadata lines."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

__all__ = ["ResultTable"]


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return repr(float(x))


@dataclass
class ResultTable:
    columns: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def add(self, name, values):
        """Add a column; complex data becomes ``name_re`` and ``name_im``."""
        values = np.asarray(values).ravel()
        if self.columns:
            length = len(next(iter(self.columns.values())))
            if len(values) != length:
                raise ValueError(f"column {name!r} has length {len(values)}, expected {length}")
        if np.iscomplexobj(values):
            self.columns[f"{name}_re"] = values.real.copy()
            self.columns[f"{name}_im"] = values.imag.copy()
        else:
            self.columns[name] = values
        return self

    def __len__(self):
        return len(next(iter(self.columns.values()))) if self.columns else 0

    def to_csv(self) -> str:
        if not self.metadata:
            raise ValueError("metadata must not be empty")
        buf = io.StringIO()
        for key, val in self.metadata.items():
            buf.write(f"# {key}: {val}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(list(self.columns))
        cols = list(self.columns.values())
        for i in range(len(self)):
            writer.writerow([_fmt(c[i]) for c in cols])
        return buf.getvalue()

    @staticmethod
    def read_csv(text):
        """Inverse of :meth:`to_csv` returning ``(metadata, columns)`` with float columns."""
        meta, body = {}, []
        for line in text.splitlines():
            if line.startswith("# "):
                key, _, val = line[2:].partition(": ")
                meta[key] = val
            else:
                body.append(line)
        rows = list(csv.reader(body))
        header, data = rows[0], rows[1:]
        cols = {}
        for j, name in enumerate(header):
            vals = [r[j] for r in data]
            try:
                cols[name] = np.array([float(v) for v in vals])
            except ValueError:
                cols[name] = vals
        return meta, cols
