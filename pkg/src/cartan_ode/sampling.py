"""Seeded sampling of points in the jet chart."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SamplingConfig:
    """Where and how densely to sample the chart (x, y, y1, y2).

    ``y1_range`` is a magnitude range; the sign of y1 is drawn separately so
    the box stays clear of the y1 = 0 singular locus.  ``tol`` is the relative
    singular-value threshold used by rank computations.
    """

    seed: int = 0
    samples: int = 25
    tol: float = 1e-9
    x_range: tuple[float, float] = (-2.0, 2.0)
    y_range: tuple[float, float] = (-2.0, 2.0)
    y1_range: tuple[float, float] = (0.5, 2.0)
    y2_range: tuple[float, float] = (-2.0, 2.0)

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if not 0.0 < self.tol < 1.0:
            raise ValueError("tol must lie in (0, 1)")
        if self.y1_range[0] <= 0.0:
            raise ValueError("y1 range must exclude a neighborhood of 0")

    def point(self, index: int) -> dict[str, float]:
        # one stream per (seed, index): sample i does not depend on the count
        rng = np.random.default_rng([self.seed, index])
        lo, hi = self.y1_range
        sign = 1.0 if rng.random() < 0.5 else -1.0
        return {
            "x": float(rng.uniform(*self.x_range)),
            "y": float(rng.uniform(*self.y_range)),
            "y1": sign * float(rng.uniform(lo, hi)),
            "y2": float(rng.uniform(*self.y2_range)),
        }

    def points(self, count: int | None = None) -> list[dict[str, float]]:
        return [self.point(i) for i in range(self.samples if count is None else count)]
