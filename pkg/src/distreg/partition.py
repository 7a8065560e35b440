"""Partitions of a bounded response range into consecutive bins.

A partition of [lower, upper] by m interior cut-points defines m+1
half-open bins [c_{i-1}, c_i); the last bin is closed at the upper bound
so that every value in [lower, upper] belongs to exactly one bin. Bins
are numbered 1..m+1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

MAX_REJECTION_ATTEMPTS = 10_000


class PartitionError(ValueError):
    """Invalid partition construction or query."""


@dataclass(frozen=True)
class Partition:
    lower: float
    upper: float
    cuts: tuple[float, ...]

    def __post_init__(self):
        if not self.lower < self.upper:
            raise PartitionError(f"lower ({self.lower}) must be < upper ({self.upper})")
        cuts = tuple(float(c) for c in self.cuts)
        if len(cuts) < 1:
            raise PartitionError("at least one cut-point required")
        object.__setattr__(self, "cuts", cuts)
        edges = np.concatenate(([self.lower], cuts, [self.upper]))
        if not np.all(np.diff(edges) > 0):
            raise PartitionError(f"cut-points must be strictly inside ({self.lower}, {self.upper}) and strictly increasing: {cuts}")
        widths = np.diff(edges)
        span = self.upper - self.lower
        if abs(widths.sum() - span) > 1e-12 * abs(span):
            raise PartitionError("bin widths do not telescope to the range")
        object.__setattr__(self, "_edges", edges)
        object.__setattr__(self, "_widths", widths)

    @property
    def n_bins(self) -> int:
        return len(self.cuts) + 1

    @property
    def edges(self) -> np.ndarray:
        """All m+2 boundaries: lower, cuts..., upper."""
        return self._edges

    @property
    def widths(self) -> np.ndarray:
        """Widths of bins 1..m+1."""
        return self._widths

    def bin_index(self, y):
        """Bin number (1-based) containing y.

        Bins are half-open on the right except the last, which includes
        the upper bound. Accepts scalars or arrays.
        """
        y = np.asarray(y, dtype=float)
        if np.any(y < self.lower) or np.any(y > self.upper):
            bad = y[(y < self.lower) | (y > self.upper)]
            raise PartitionError(f"value(s) outside [{self.lower}, {self.upper}]: {np.atleast_1d(bad)[:5]}")
        idx = np.searchsorted(np.asarray(self.cuts), y, side="right") + 1
        if y.ndim == 0:
            return int(idx)
        return idx.astype(int)

    def bin_width(self, i: int) -> float:
        if not 1 <= i <= self.n_bins:
            raise PartitionError(f"bin index {i} out of range 1..{self.n_bins}")
        return float(self._widths[i - 1])

    def to_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "cuts": list(self.cuts)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "Partition":
        return cls(float(d["lower"]), float(d["upper"]), tuple(d["cuts"]))

    @classmethod
    def from_json(cls, s: str) -> "Partition":
        return cls.from_dict(json.loads(s))


def even_partition(lower: float, upper: float, m: int) -> Partition:
    """Evenly spaced partition: m cuts, m+1 bins of equal width."""
    if m < 1:
        raise PartitionError(f"need at least one cut-point, got m={m}")
    if not lower < upper:
        raise PartitionError(f"lower ({lower}) must be < upper ({upper})")
    h = (upper - lower) / (m + 1)
    cuts = tuple(lower + (i + 1) * h for i in range(m))
    return Partition(lower, upper, cuts)


def random_partition(lower: float, upper: float, m: int, seed,
                     min_width_fraction: float | None = None) -> Partition:
    """Partition whose cuts are sorted iid Uniform(lower, upper) draws.

    The whole draw is rejected and retried until every bin width is at
    least min_width_fraction * (upper - lower); the default floor
    0.01/(m+1) keeps density values bounded without materially
    distorting the uniform law. Deterministic given seed.
    """
    if m < 1:
        raise PartitionError(f"need at least one cut-point, got m={m}")
    if not lower < upper:
        raise PartitionError(f"lower ({lower}) must be < upper ({upper})")
    if min_width_fraction is None:
        min_width_fraction = 0.01 / (m + 1)
    if not 0 <= min_width_fraction < 1 / (m + 1):
        raise PartitionError(f"min_width_fraction must be in [0, 1/(m+1)), got {min_width_fraction}")
    rng = np.random.default_rng(seed)
    span = upper - lower
    floor = min_width_fraction * span
    for _ in range(MAX_REJECTION_ATTEMPTS):
        draws = rng.uniform(lower, upper, size=m)
        # an exact boundary hit has probability ~0 but is possible in floats
        if np.any(draws == lower) or np.any(draws == upper):
            continue
        draws.sort()
        edges = np.concatenate(([lower], draws, [upper]))
        if np.all(np.diff(edges) >= floor):
            return Partition(lower, upper, tuple(draws))
    raise PartitionError(
        f"no acceptable partition after {MAX_REJECTION_ATTEMPTS} draws; "
        f"min_width_fraction={min_width_fraction} is likely too large for m={m}")
