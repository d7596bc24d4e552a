"""Reading the experiment CSV schema without depending on the library."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

EXPECTED_HEADER = [
    "experiment",
    "generator",
    "i",
    "n",
    "kernel",
    "value",
    "value_kind",
    "seed",
    "extra",
]


class SchemaError(Exception):
    """The CSV does not follow the experiment-record schema."""


@dataclass(frozen=True)
class Row:
    experiment: str
    generator: str
    i: int
    n: int
    kernel: str
    value: float
    value_kind: str
    seed: int
    extra: dict = field(default_factory=dict)

    @property
    def series(self) -> str:
        return self.extra.get("series", "")


def read_rows(path: str | Path) -> list[Row]:
    """Parse one experiment CSV, validating the header and field types."""
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"{path}: no such file")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != EXPECTED_HEADER:
            raise SchemaError(f"{path}: header {reader.fieldnames} != {EXPECTED_HEADER}")
        rows = []
        for line_no, raw in enumerate(reader, start=2):
            try:
                rows.append(
                    Row(
                        experiment=raw["experiment"],
                        generator=raw["generator"],
                        i=int(raw["i"]),
                        n=int(raw["n"]),
                        kernel=raw["kernel"],
                        value=float(raw["value"]),
                        value_kind=raw["value_kind"],
                        seed=int(raw["seed"]),
                        extra=json.loads(raw["extra"]) if raw["extra"] else {},
                    )
                )
            except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
                raise SchemaError(f"{path}:{line_no}: bad row ({exc})") from exc
    return rows
