"""CSV emission of experiment results.

One row per (replicate, t) for t = 1..n. Row t carries the cost of the
step just taken (c_{t-1}), the regret R(t) and R(t)/sqrt(t); at update
times it also carries the identification error of the estimate built from
the first t transitions, its t^{1/4}-normalized value, and the closed-loop
spectral radii of the newly installed gain. ``episode`` counts updates
performed at or before t. Missing values are empty fields.
"""

import csv
import math
from pathlib import Path

import numpy as np

HEADER = ("replicate", "t", "cost", "regret", "norm_regret", "est_error",
          "norm_est_error", "rho_actual", "rho_surrogate", "episode")


class CsvParseError(ValueError):
    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: {message}")
        self.line = line


def _fmt(v):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".12g")


def iter_rows(result):
    for rep in result.completed:
        n = rep.horizon
        updates = {int(t): k for k, t in enumerate(rep.update_times)}
        episode = 0
        for t in range(1, n + 1):
            k = updates.get(t)
            if k is not None:
                episode = k + 1
                est = rep.est_errors[k]
                extra = (est, t ** 0.25 * est, rep.rho_actual[k], rep.rho_surrogate[k])
            else:
                extra = (None, None, None, None)
            R = rep.regret[t]
            yield (rep.index, t, rep.costs[t - 1], R, R / math.sqrt(t)) + extra + (episode,)


def write_csv(result, path):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(HEADER)
            for row in ([] if result is None else iter_rows(result)):
                w.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def read_csv(path):
    """Parse a results CSV into a dict of column arrays (NaN for empty fields)."""
    path = Path(path)
    cols = {name: [] for name in HEADER}
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != HEADER:
            raise CsvParseError(path, 1, f"bad header {header!r}")
        for row in reader:
            line = reader.line_num
            if len(row) != len(HEADER):
                raise CsvParseError(path, line, f"expected {len(HEADER)} fields, got {len(row)}")
            for name, field in zip(HEADER, row):
                try:
                    cols[name].append(float(field) if field != "" else math.nan)
                except ValueError:
                    raise CsvParseError(path, line, f"bad value {field!r} in column {name}") from None
    out = {name: np.array(vals, dtype=float) for name, vals in cols.items()}
    for name in ("replicate", "t", "episode"):
        out[name] = out[name].astype(int)
    return out
