"""Scan records shared by the experiment and analysis layers.

Both record types serialize to the same four-column CSV layout::

    phase_or_delay,counts,accidentals,regime_flag

so hand-made files can be analyzed with the same tooling.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigurationError

CSV_COLUMNS = ("phase_or_delay", "counts", "accidentals", "regime_flag")


@dataclass
class FringeScan:
    """One interference scan: counts vs. applied phase.

    ``accidentals`` holds the expected accidental counts per point (the
    bookkeeping estimate, not the sampled values).  ``regime_flags`` is
    0 where the noise generators were off and 1 where they were on.
    """

    phases: np.ndarray
    counts: np.ndarray
    accidentals: np.ndarray
    regime_flags: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.phases = np.asarray(self.phases, dtype=float)
        self.counts = np.asarray(self.counts, dtype=float)
        self.accidentals = np.asarray(self.accidentals, dtype=float)
        self.regime_flags = np.asarray(self.regime_flags, dtype=int)
        n = self.phases.shape[0]
        for name in ("counts", "accidentals", "regime_flags"):
            if getattr(self, name).shape[0] != n:
                raise ConfigurationError(f"column {name} length differs from phases")

    @property
    def n_points(self) -> int:
        return int(self.phases.shape[0])

    def regime_slice(self, flag: int) -> "FringeScan":
        mask = self.regime_flags == flag
        return FringeScan(
            phases=self.phases[mask],
            counts=self.counts[mask],
            accidentals=self.accidentals[mask],
            regime_flags=self.regime_flags[mask],
            meta=dict(self.meta, regime=flag),
        )

    @property
    def transition_index(self) -> int | None:
        """Index of the first noise-on point, or None if single-regime."""
        on = np.nonzero(self.regime_flags == 1)[0]
        if on.size == 0 or on.size == self.n_points:
            return None
        return int(on[0])

    def to_csv(self, path) -> None:
        path = Path(path)
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(CSV_COLUMNS)
            for row in zip(self.phases, self.counts, self.accidentals, self.regime_flags):
                writer.writerow([repr(float(row[0])), repr(float(row[1])), repr(float(row[2])), int(row[3])])

    @classmethod
    def from_csv(cls, path) -> "FringeScan":
        path = Path(path)
        with path.open("r", newline="", encoding="utf-8") as handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            if header is None or tuple(h.strip() for h in header) != CSV_COLUMNS:
                raise ConfigurationError(
                    f"{path}: expected header {','.join(CSV_COLUMNS)}"
                )
            rows = [row for row in reader if row]
        if not rows:
            raise ConfigurationError(f"{path}: no data rows")
        data = np.array([[float(v) for v in row] for row in rows])
        return cls(
            phases=data[:, 0],
            counts=data[:, 1],
            accidentals=data[:, 2],
            regime_flags=data[:, 3].astype(int),
            meta={"source_file": str(path)},
        )


@dataclass
class HOMScan:
    """Two-photon interference dip scan: coincidences vs. mode overlap.

    The ``phase_or_delay`` CSV column carries the overlap grid.  The dip
    visibility is computed from the two extreme grid points.
    """

    overlaps: np.ndarray
    counts: np.ndarray
    expected: np.ndarray
    max_counts: float
    min_counts: float
    visibility: float | None
    low_statistics: bool
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.overlaps = np.asarray(self.overlaps, dtype=float)
        self.counts = np.asarray(self.counts, dtype=float)
        self.expected = np.asarray(self.expected, dtype=float)

    def to_csv(self, path) -> None:
        path = Path(path)
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(CSV_COLUMNS)
            for overlap, cnt, exp in zip(self.overlaps, self.counts, self.expected):
                writer.writerow([repr(float(overlap)), repr(float(cnt)), repr(float(exp)), 0])
