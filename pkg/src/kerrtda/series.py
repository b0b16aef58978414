"""Uniformly sampled scalar time series."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TimeSeries:
    """Real samples ``values[k]`` taken at ``t0 + k * dt``."""

    t0: float
    dt: float
    values: np.ndarray

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise ValueError("values must be one-dimensional")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        object.__setattr__(self, "values", values)

    def __len__(self):
        return len(self.values)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self.values))

    def after(self, t_start: float) -> "TimeSeries":
        """Samples with ``t >= t_start`` (to within a hundredth of a step)."""
        k = max(0, int(np.ceil((t_start - self.t0) / self.dt - 1e-2)))
        return TimeSeries(self.t0 + k * self.dt, self.dt, self.values[k:])
