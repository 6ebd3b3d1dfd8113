"""Gaussian mutual class potential and the incrementally updatable field.

The potential at a point is the sum of Gaussian RBF contributions from the
majority points minus the contributions from the minority points, with a
single spread parameter gamma shared by every RBF.  A PotentialField caches
the potential of every majority point and supports cheap subtraction of one
point's contribution, which is what makes greedy undersampling quadratic
instead of cubic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .dataio import BinaryTask
from .errors import ParameterError

# Chunk size for pairwise-distance accumulation; bounds peak memory at
# roughly chunk * n * 8 bytes.
_CHUNK = 512

TIE_LOWEST_INDEX = "lowest-index"
TIE_SEEDED_RANDOM = "seeded-random"


@dataclass(frozen=True)
class RbfParams:
    """Spread of a single radial basis function."""

    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ParameterError(f"gamma must be > 0, got {self.gamma}")


def rbf_value(distance: float, gamma: float) -> float:
    """Single RBF contribution exp(-(distance/gamma)^2); lies in (0, 1]."""
    if not gamma > 0:
        raise ParameterError(f"gamma must be > 0, got {gamma}")
    if distance < 0:
        raise ParameterError(f"distance must be >= 0, got {distance}")
    return math.exp(-((distance / gamma) ** 2))


def _rbf_sums(queries: np.ndarray, points: np.ndarray, gamma: float) -> np.ndarray:
    """Sum of RBF contributions of ``points`` at each query, chunked."""
    if len(points) == 0:
        return np.zeros(len(queries))
    inv_g2 = 1.0 / (gamma * gamma)
    out = np.empty(len(queries))
    for start in range(0, len(queries), _CHUNK):
        block = queries[start : start + _CHUNK]
        diff = block[:, None, :] - points[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        out[start : start + _CHUNK] = np.exp(-d2 * inv_g2).sum(axis=1)
    return out


def mutual_potential(x, task: BinaryTask, gamma: float) -> float:
    """Mutual class potential at ``x``: majority RBF sum minus minority RBF sum."""
    if not gamma > 0:
        raise ParameterError(f"gamma must be > 0, got {gamma}")
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (task.m,):
        raise ParameterError(f"point has shape {x.shape}, task dimensionality is {task.m}")
    query = x[None, :]
    return float(
        _rbf_sums(query, task.majority, gamma)[0] - _rbf_sums(query, task.minority, gamma)[0]
    )


class PotentialField:
    """Per-majority-point potentials with incremental subtraction.

    The field is initialized against the full original majority set (each
    point therefore includes its own unit self-contribution) and the full
    minority set.  Removing a point never recomputes anything: remaining
    potentials only ever shrink by that point's RBF contribution.

    Mutable; owned by one logical thread at a time.
    """

    def __init__(self, points: np.ndarray, phi: np.ndarray, gamma: float):
        self._points = points
        self._phi = phi
        self._alive = np.ones(len(points), dtype=bool)
        self._row_sq = np.einsum("ij,ij->i", points, points)
        self.gamma = gamma
        self.removed_count = 0

    def __len__(self) -> int:
        return int(self._alive.sum())

    @property
    def points(self) -> np.ndarray:
        """Remaining points, original order."""
        return self._points[self._alive]

    @property
    def phi(self) -> np.ndarray:
        """Potentials of the remaining points, aligned with :attr:`points`."""
        return self._phi[self._alive]

    @property
    def alive_indices(self) -> np.ndarray:
        """Original indices of the remaining points, ascending."""
        return np.flatnonzero(self._alive)

    def pop_max(self, tie_rule=TIE_LOWEST_INDEX, rng=None):
        """Remove and return ``(point, original_index)`` with maximal potential.

        Ties are broken by the lowest original index, or uniformly at random
        when ``tie_rule`` is ``"seeded-random"`` (then ``rng`` is required).
        """
        if not self._alive.any():
            raise ParameterError("cannot pop from an empty potential field")
        masked = np.where(self._alive, self._phi, -np.inf)
        if tie_rule == TIE_LOWEST_INDEX:
            index = int(np.argmax(masked))
        elif tie_rule == TIE_SEEDED_RANDOM:
            if rng is None:
                raise ParameterError("seeded-random tie rule requires an rng")
            candidates = np.flatnonzero(masked == masked.max())
            index = int(rng.choice(candidates))
        else:
            raise ParameterError(f"unknown tie rule {tie_rule!r}")
        self._alive[index] = False
        self.removed_count += 1
        return self._points[index].copy(), index

    def subtract(self, removed: np.ndarray) -> None:
        """Subtract one removed point's RBF contribution from every remaining potential."""
        removed = np.asarray(removed, dtype=np.float64)
        if removed.shape != (self._points.shape[1],):
            raise ParameterError(
                f"point has shape {removed.shape}, field dimensionality is "
                f"{self._points.shape[1]}"
            )
        # ||p - x||^2 via the dot-product identity: BLAS matvec, no n x m
        # temporary.  Cancellation can leave tiny negatives; clamp them.
        d2 = self._row_sq - 2.0 * (self._points @ removed) + removed @ removed
        np.maximum(d2, 0.0, out=d2)
        # Dead entries get stale values; they are masked out everywhere.
        self._phi -= np.exp(-d2 / (self.gamma * self.gamma))


def init_field(task: BinaryTask, gamma: float) -> PotentialField:
    """Potential of every majority point against the full original task."""
    if not gamma > 0:
        raise ParameterError(f"gamma must be > 0, got {gamma}")
    phi = _rbf_sums(task.majority, task.majority, gamma) - _rbf_sums(
        task.majority, task.minority, gamma
    )
    return PotentialField(task.majority.astype(np.float64, copy=True), phi, gamma)


def subtract_contribution(field: PotentialField, removed) -> None:
    """Alias of :meth:`PotentialField.subtract` (free-function form)."""
    field.subtract(removed)


# ---------------------------------------------------------------------------
# Grid emission for visualization


@dataclass(frozen=True)
class PotentialGrid:
    """Potential sampled at cell centers of a regular 2-D grid.

    ``values[i, j]`` is the potential at x-center ``i`` and y-center ``j``
    (axis order follows feature order); flattening is row-major, x varying
    slowest.
    """

    bounds: tuple[tuple[float, float], tuple[float, float]]
    resolution: int
    values: np.ndarray

    def cell_centers(self):
        (x_lo, x_hi), (y_lo, y_hi) = self.bounds
        step_x = (x_hi - x_lo) / self.resolution
        step_y = (y_hi - y_lo) / self.resolution
        xs = x_lo + (np.arange(self.resolution) + 0.5) * step_x
        ys = y_lo + (np.arange(self.resolution) + 0.5) * step_y
        return xs, ys

    def to_csv(self) -> str:
        xs, ys = self.cell_centers()
        lines = ["x,y,phi"]
        for i, x in enumerate(xs):
            for j, y in enumerate(ys):
                lines.append("%.17g,%.17g,%.17g" % (x, y, self.values[i, j]))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(
            {
                "bounds": [list(self.bounds[0]), list(self.bounds[1])],
                "resolution": self.resolution,
                "values": self.values.tolist(),
            }
        )


def potential_grid(task: BinaryTask, gamma: float, bounds, resolution: int) -> PotentialGrid:
    """Evaluate the mutual class potential over a 2-D grid of cell centers."""
    if task.m != 2:
        raise ParameterError(f"potential grids are defined for 2-D data, got m={task.m}")
    if resolution < 2:
        raise ParameterError(f"resolution must be >= 2, got {resolution}")
    if not gamma > 0:
        raise ParameterError(f"gamma must be > 0, got {gamma}")
    (x_lo, x_hi), (y_lo, y_hi) = bounds
    if not (x_hi > x_lo and y_hi > y_lo):
        raise ParameterError("bounds must satisfy lo < hi on both axes")

    xs = x_lo + (np.arange(resolution) + 0.5) * ((x_hi - x_lo) / resolution)
    ys = y_lo + (np.arange(resolution) + 0.5) * ((y_hi - y_lo) / resolution)
    cells = np.stack([np.repeat(xs, resolution), np.tile(ys, resolution)], axis=1)
    phi = _rbf_sums(cells, task.majority, gamma) - _rbf_sums(cells, task.minority, gamma)
    return PotentialGrid(
        bounds=((float(x_lo), float(x_hi)), (float(y_lo), float(y_hi))),
        resolution=int(resolution),
        values=phi.reshape(resolution, resolution),
    )
