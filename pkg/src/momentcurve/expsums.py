"""Cubic exponential sums S(x) = sum_k a_k e(k x1 + k^2 x2 + k^3 x3).

Frequencies are the integer moment-curve points (k, k^2, k^3) for k = 1..N.
Coefficients are bounded by 1 in modulus. The x3 integration interval used by
the moment engines is H = [h0, h0 + N^(-sigma)], carried on the spec object.

e(t) means exp(2*pi*i*t) throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetError, SpecValidationError

TWO_PI = 2.0 * math.pi

# Unit-modulus phase factors drift away from the unit circle under repeated
# multiplication; renormalize after this many recurrence steps.
RENORM_INTERVAL = 4096

# Default cap on cells materialized by eval_grid (complex128 => ~256 MiB).
DEFAULT_GRID_CELL_BUDGET = 2**24

COEFF_MODULUS_TOL = 1e-12


@dataclass(frozen=True)
class Point3:
    """A point in R^3, the argument of the exponential sum."""

    x1: float
    x2: float
    x3: float

    def __post_init__(self) -> None:
        for v in (self.x1, self.x2, self.x3):
            if not math.isfinite(v):
                raise SpecValidationError("Point3 coordinates must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.x3], dtype=float)


@dataclass(frozen=True)
class FreqInterval:
    """Half-open frequency band [lo, hi) on the normalized axis k/N.

    A band ending at hi = 1 is closed on the right, so k = N belongs to the
    final band of any partition of [0, 1].
    """

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.lo < self.hi <= 1.0):
            raise SpecValidationError(
                f"frequency band needs 0 <= lo < hi <= 1, got [{self.lo}, {self.hi})"
            )

    def selects(self, n: int) -> np.ndarray:
        """Boolean mask over k = 1..n of frequencies with k/n in the band."""
        ratio = np.arange(1, n + 1) / n
        upper = ratio <= self.hi if self.hi == 1.0 else ratio < self.hi
        return (ratio >= self.lo) & upper


@dataclass(frozen=True)
class ExpSumSpec:
    """Full description of one cubic exponential sum.

    Parameters
    ----------
    n : number of frequencies N >= 1.
    coeffs : complex coefficients a_1..a_N, each of modulus <= 1 (+1e-12).
    sigma : x3-interval shrinking exponent in [0, 2]; H has length N^(-sigma).
    h0 : left endpoint of H.
    """

    n: int
    coeffs: np.ndarray = field(repr=False)
    sigma: float = 0.0
    h0: float = 0.0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise SpecValidationError(f"need n >= 1, got {self.n}")
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if coeffs.shape != (self.n,):
            raise SpecValidationError(
                f"coeffs must have shape ({self.n},), got {coeffs.shape}"
            )
        if not np.all(np.isfinite(coeffs.view(float))):
            raise SpecValidationError("coeffs must be finite")
        worst = float(np.max(np.abs(coeffs))) if self.n else 0.0
        if worst > 1.0 + COEFF_MODULUS_TOL:
            raise SpecValidationError(f"|a_k| <= 1 required, max is {worst}")
        if not (0.0 <= self.sigma <= 2.0):
            raise SpecValidationError(f"sigma must lie in [0, 2], got {self.sigma}")
        if not math.isfinite(self.h0):
            raise SpecValidationError("h0 must be finite")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def h_length(self) -> float:
        """Length of the x3 interval H, exactly N^(-sigma)."""
        return float(self.n) ** (-self.sigma)

    @property
    def h_interval(self) -> tuple[float, float]:
        return (self.h0, self.h0 + self.h_length)

    def frequencies(self) -> np.ndarray:
        """Integer frequency triples, shape (N, 3): rows (k, k^2, k^3)."""
        k = np.arange(1, self.n + 1, dtype=float)
        return np.column_stack([k, k**2, k**3])


def _as_points(x) -> np.ndarray:
    """Coerce a Point3, a length-3 sequence, or an (m, 3) array to (m, 3)."""
    if isinstance(x, Point3):
        pts = x.as_array()[None, :]
    else:
        pts = np.atleast_2d(np.asarray(x, dtype=float))
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise SpecValidationError(f"expected points of shape (m, 3), got {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise SpecValidationError("points must be finite")
    return pts


def eval_sum(spec: ExpSumSpec, x) -> complex | np.ndarray:
    """Evaluate S(x) at one point or at an (m, 3) batch of points.

    Returns a scalar for a single point, else an array of shape (m,).
    """
    pts = _as_points(x)
    k = np.arange(1, spec.n + 1, dtype=float)
    phase = np.outer(k, pts[:, 0]) + np.outer(k**2, pts[:, 1]) + np.outer(k**3, pts[:, 2])
    values = spec.coeffs @ np.exp(2j * math.pi * phase)
    if (isinstance(x, Point3) or np.asarray(x).ndim == 1) and values.shape == (1,):
        return complex(values[0])
    return values


def eval_partial_sum(spec: ExpSumSpec, band: FreqInterval, x) -> complex | np.ndarray:
    """Evaluate the sub-sum restricted to frequencies with k/N in `band`."""
    mask = band.selects(spec.n)
    if not mask.any():
        pts = _as_points(x)
        zeros = np.zeros(pts.shape[0], dtype=complex)
        if isinstance(x, Point3) or np.asarray(x).ndim == 1:
            return 0j
        return zeros
    sub = ExpSumSpec(
        n=spec.n,
        coeffs=np.where(mask, spec.coeffs, 0.0),
        sigma=spec.sigma,
        h0=spec.h0,
    )
    return eval_sum(sub, x)


def band_partition(edges: np.ndarray) -> list[FreqInterval]:
    """Turn sorted edges 0 = e0 < e1 < ... < em = 1 into half-open bands."""
    edges = np.asarray(edges, dtype=float)
    if edges[0] != 0.0 or edges[-1] != 1.0 or np.any(np.diff(edges) <= 0):
        raise SpecValidationError("edges must increase strictly from 0 to 1")
    return [FreqInterval(float(a), float(b)) for a, b in zip(edges[:-1], edges[1:])]


def phase_row(nu: np.ndarray, start: float, step: float, count: int) -> np.ndarray:
    """Phase factors e(nu * (start + step*j)) for j = 0..count-1, per frequency.

    Built with one exp per frequency and a multiplicative recurrence along the
    axis, renormalized to unit modulus every RENORM_INTERVAL steps. Shape of
    the result is (len(nu), count).
    """
    nu = np.asarray(nu, dtype=float)
    out = np.empty((nu.size, count), dtype=complex)
    if count == 0:
        return out
    out[:, 0] = np.exp(2j * math.pi * nu * start)
    ratio = np.exp(2j * math.pi * nu * step)
    pos = 1
    while pos < count:
        block = min(RENORM_INTERVAL, count - pos)
        steps = np.cumprod(np.broadcast_to(ratio[:, None], (nu.size, block)), axis=1)
        out[:, pos : pos + block] = out[:, pos - 1 : pos] * steps
        pos += block
        last = out[:, pos - 1]
        out[:, pos - 1] = last / np.abs(last)
    return out


def grid_axes(box_corner, box_sides, counts) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cell-center coordinates of a uniform grid over an axis-aligned box."""
    axes = []
    for corner, side, m in zip(box_corner, box_sides, counts):
        m = int(m)
        if m < 1:
            raise SpecValidationError("grid counts must be >= 1")
        step = side / m
        axes.append(corner + step * (np.arange(m) + 0.5))
    return tuple(axes)


def eval_grid(
    spec: ExpSumSpec,
    box_corner=(0.0, 0.0, 0.0),
    box_sides=(1.0, 1.0, 1.0),
    counts=(16, 16, 16),
    cell_budget: int = DEFAULT_GRID_CELL_BUDGET,
) -> np.ndarray:
    """Evaluate S on the cell centers of a uniform grid over a box.

    Returns a complex array of shape `counts`. Phase factors along each axis
    come from per-frequency multiplicative recurrences (see phase_row), so the
    cost is O(N * m1 * m2 * m3) multiplications plus O(N * (m1 + m2 + m3))
    exponentials. Grids larger than `cell_budget` cells are rejected.
    """
    m1, m2, m3 = (int(c) for c in counts)
    if min(m1, m2, m3) < 1:
        raise SpecValidationError("grid counts must be >= 1")
    cells = m1 * m2 * m3
    if cells > cell_budget:
        raise BudgetError("grid cells", cells, cell_budget)
    k = np.arange(1, spec.n + 1, dtype=float)
    steps = [side / m for side, m in zip(box_sides, (m1, m2, m3))]
    starts = [corner + step / 2 for corner, step in zip(box_corner, steps)]
    u = spec.coeffs[:, None] * phase_row(k, starts[0], steps[0], m1)
    v = phase_row(k**2, starts[1], steps[1], m2)
    w = phase_row(k**3, starts[2], steps[2], m3)
    planes = u[:, :, None] * v[:, None, :]
    return np.tensordot(planes, w, axes=(0, 0))
