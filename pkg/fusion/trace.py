# fusion/trace.py
"""Per-iteration record of the outer solver and its CSV export."""

import csv
from dataclasses import dataclass, field
from typing import NamedTuple

TRACE_COLUMNS = (
    "iter", "E", "O", "D", "R", "zeta1", "zeta2", "L1", "L2", "gap_u", "gap_v", "inner_iters",
)


class TraceRow(NamedTuple):
    iter: int
    E: float
    O: float
    D: float
    R: float
    zeta1: float
    zeta2: float
    L1: float
    L2: float
    gap_u: float
    gap_v: float
    inner_iters: int


@dataclass
class EnergyTrace:
    """
    One row per accepted outer iteration, plus the energy of the starting point.

    ``warnings`` collects iterations where the inner primal-dual solve stopped
    at its cap; ``stop_reason`` is ``"converged"`` or ``"maxiter"`` once the
    run is over.
    """

    initial: object = None
    rows: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    stop_reason: str = ""

    def append(self, row):
        self.rows.append(row)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    @property
    def last(self):
        return self.rows[-1] if self.rows else None

    @property
    def converged(self):
        return self.stop_reason == "converged"

    def column(self, name):
        return [getattr(row, name) for row in self.rows]


def format_value(value, digits=12):
    if isinstance(value, int):
        return str(value)
    return f"{value:.{digits}g}"


def write_trace_csv(trace, path, digits=12):
    """Write ``trace`` as CSV with the fixed header and ``digits`` significant digits."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for row in trace.rows:
            writer.writerow([format_value(value, digits) for value in row])
