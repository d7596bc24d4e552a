import csv
import json

import pytest

HEADER = ["experiment", "generator", "i", "n", "kernel", "value", "value_kind", "seed", "extra"]

SCHEDULE = [(2, 15), (3, 45), (4, 108), (5, 222), (6, 408)]


def _write(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(HEADER)
        for row in rows:
            writer.writerow(row)


def _wce_rows(slope=-0.875):
    rows = []
    for i, n in SCHEDULE:
        for kernel, scale in (("K1", 1.0), ("K2", 0.8)):
            rows.append(
                ["wce", "design", str(i), str(n), kernel, repr(scale * n**slope), "wce",
                 "7", json.dumps({"series": "design"})]
            )
        for trial in (1, 2, 3):
            for kernel in ("K1", "K2"):
                value = 0.98 * n**-0.5 * (1.0 + 0.05 * trial)
                rows.append(
                    ["wce", "random", "0", str(n), kernel, repr(value), "wce", "8",
                     json.dumps({"series": "draw", "trial": trial})]
                )
        for kernel, c in (("K1", 0.9783619234548956), ("K2", 0.9573863530780888)):
            rows.append(
                ["wce", "random", "0", str(n), kernel, repr(c * n**-0.5), "wce", "9",
                 json.dumps({"series": "expected"})]
            )
    return rows


def _covering_rows(slope=-0.25):
    rows = []
    for i, n in SCHEDULE:
        rows.append(
            ["covering", "design", str(i), str(n), "", repr(1.9 * n**slope), "rho_hat",
             "7", json.dumps({"series": "design", "probes": 1000})]
        )
        rows.append(
            ["covering", "random", "0", str(n), "", repr(2.4 * n**slope), "rho_hat",
             "8", json.dumps({"series": "draw", "trial": 1, "probes": 1000})]
        )
        rows.append(
            ["covering", "random", "0", str(n), "", repr(2.0 * n**-0.25), "rho_hat",
             "9", json.dumps({"series": "expected"})]
        )
    return rows


@pytest.fixture
def wce_csv(tmp_path):
    path = tmp_path / "wce.csv"
    _write(path, _wce_rows())
    return path


@pytest.fixture
def covering_csv(tmp_path):
    path = tmp_path / "covering.csv"
    _write(path, _covering_rows())
    return path
