"""Frequency-space geometry of the moment curve gamma(t) = (t, t^2, t^3).

The objects here are anisotropic neighborhoods of the curve, their partitions
into caps and blocks, frame-coefficient boxes spanned by the derivative frame
(gamma', gamma'', gamma'''), an affine cone map, and an affine rescaling that
renormalizes a block back to the unit-scale neighborhood. The check_*
functions are sampled verifications of containment and overlap statements:
each samples points from the defining inequalities, pushes them through the
relevant maps, and counts violations against explicit-constant bounds (the
asymptotic constants are represented by the free multiplier c_eps and the
fixed width factor WIDTH_FACTOR).

All membership tests apply multiplicative slack 1 + SLACK on each bound so
that exact boundary points survive roundoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SpecValidationError

SLACK = 1e-9
# Samplers draw defects slightly inside their tolerances: recomputing a
# defect from the assembled point costs absolute rounding ~1e-16, which can
# exceed the multiplicative SLACK when the tolerance itself is ~1e-12.
DEFECT_MARGIN = 1.0 - 1e-3
SQRT2 = math.sqrt(2.0)
# Explicit stand-in for the absorbed absolute constants in the containment
# statements: cap widths are WIDTH_FACTOR * c_eps * (scaling law).
WIDTH_FACTOR = 10.0
# Same role for the overlap offset threshold in check_overlap_geo1.
OVERLAP_FACTOR = 10.0
# Frame-box comparability dilation (outer) and contraction (inner) factor.
COMPARABILITY_FACTOR = 20.0


def curve_point(t):
    """gamma(t) = (t, t^2, t^3), vectorized over the last axis."""
    t = np.asarray(t, dtype=float)
    return np.stack([t, t**2, t**3], axis=-1)


def frenet_frame(t: float):
    """Derivative frame (gamma', gamma'', gamma''') at parameter t."""
    t = float(t)
    d1 = np.array([1.0, 2.0 * t, 3.0 * t * t])
    d2 = np.array([0.0, 2.0, 6.0 * t])
    d3 = np.array([0.0, 0.0, 6.0])
    return d1, d2, d3


def frame_matrix(t: float) -> np.ndarray:
    """3x3 matrix whose columns are the frame vectors at t (det = 12)."""
    return np.column_stack(frenet_frame(t))


def frame_coordinates(t0: float, q) -> np.ndarray:
    """Coefficients (A, B, C) with q = A gamma'(t0) + B gamma''(t0) + C gamma'''(t0).

    The frame matrix is lower triangular in this ordering, so the solve is an
    exact back-substitution.
    """
    q = np.asarray(q, dtype=float)
    a = q[..., 0]
    b = (q[..., 1] - 2.0 * t0 * a) / 2.0
    c = (q[..., 2] - 3.0 * t0 * t0 * a - 6.0 * t0 * b) / 6.0
    return np.stack([a, b, c], axis=-1)


def defect2(xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    return xi[..., 1] - xi[..., 0] ** 2


def defect3(xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    return xi[..., 2] - 3.0 * xi[..., 0] * xi[..., 1] + 2.0 * xi[..., 0] ** 3


@dataclass(frozen=True)
class DecouplingParams:
    """Scale pair (R, beta) defining the curved neighborhood and its caps.

    The neighborhood constrains |xi2 - xi1^2| <= R^(-2 beta) and the cubic
    defect |xi3 - 3 xi1 xi2 + 2 xi1^3| <= R^(-1); caps slice it into
    ceil(R^beta) slabs of xi1-width R^(-beta).
    """

    r_scale: float
    beta: float

    def __post_init__(self) -> None:
        if not (self.r_scale >= 2.0):
            raise SpecValidationError("r_scale must be >= 2")
        if not (1.0 / 3.0 <= self.beta <= 1.0):
            raise SpecValidationError("beta must lie in [1/3, 1]")

    @property
    def cap_width(self) -> float:
        return self.r_scale ** (-self.beta)

    @property
    def n_caps(self) -> int:
        return math.ceil(self.r_scale**self.beta)

    @property
    def defect2_tol(self) -> float:
        return self.r_scale ** (-2.0 * self.beta)

    @property
    def defect3_tol(self) -> float:
        return 1.0 / self.r_scale

    @property
    def cube_exponent(self) -> float:
        """Exponent of the smallest admissible averaging cube, max(2 beta, 1)."""
        return max(2.0 * self.beta, 1.0)


def neighborhood_membership(params: DecouplingParams, xi, slack: float = 0.0):
    """True where xi1 in [0,1] and both defects are within tolerance."""
    xi = np.asarray(xi, dtype=float)
    ok1 = (xi[..., 0] >= -slack) & (xi[..., 0] <= 1.0 + slack)
    ok2 = np.abs(defect2(xi)) <= params.defect2_tol * (1.0 + slack)
    ok3 = np.abs(defect3(xi)) <= params.defect3_tol * (1.0 + slack)
    return ok1 & ok2 & ok3


def cap_index_of(params: DecouplingParams, xi):
    """Cap index floor(xi1 * R^beta) for members, None for non-members.

    The slices are half-open so each member lands in exactly one cap; the
    right endpoint xi1 = 1 is closed into the last cap so the slices cover
    the whole neighborhood.
    """
    xi = np.asarray(xi, dtype=float)
    if xi.ndim == 1:
        if not bool(neighborhood_membership(params, xi)):
            return None
        idx = int(xi[0] * params.r_scale**params.beta)
        return min(idx, params.n_caps - 1)
    member = neighborhood_membership(params, xi)
    idx = np.minimum(
        (xi[..., 0] * params.r_scale**params.beta).astype(int), params.n_caps - 1
    )
    return np.where(member, idx, -1)


@dataclass(frozen=True)
class SmallCap:
    """One xi1-slice of the curved neighborhood."""

    params: DecouplingParams
    l: int

    def __post_init__(self) -> None:
        if not (0 <= self.l < self.params.n_caps):
            raise SpecValidationError("cap index out of range")

    @property
    def t0(self) -> float:
        return self.l * self.params.cap_width

    def contains(self, xi, slack: float = SLACK):
        xi = np.asarray(xi, dtype=float)
        w = self.params.cap_width
        lo, hi = self.l * w, (self.l + 1) * w
        in_slice = (xi[..., 0] >= lo - slack * w) & (xi[..., 0] < hi + slack * w)
        if self.l == self.params.n_caps - 1:
            in_slice = (xi[..., 0] >= lo - slack * w) & (xi[..., 0] <= 1.0 + slack)
        return in_slice & neighborhood_membership(self.params, xi, slack)


@dataclass(frozen=True)
class CanonicalBlock:
    """xi1-slice of width 1/s with defect tolerances s^-2 and s^-3."""

    s: int
    l: int

    def __post_init__(self) -> None:
        if self.s < 1:
            raise SpecValidationError("block scale must be a positive integer")
        if not (0 <= self.l < self.s):
            raise SpecValidationError("block index out of range")

    @property
    def t0(self) -> float:
        return self.l / self.s

    def contains(self, xi, slack: float = SLACK):
        xi = np.asarray(xi, dtype=float)
        w = 1.0 / self.s
        in_slice = (xi[..., 0] >= self.t0 - slack * w) & (
            xi[..., 0] < self.t0 + w * (1.0 + slack)
        )
        ok2 = np.abs(defect2(xi)) <= self.s ** (-2.0) * (1.0 + slack)
        ok3 = np.abs(defect3(xi)) <= self.s ** (-3.0) * (1.0 + slack)
        return in_slice & ok2 & ok3


def sample_neighborhood(params: DecouplingParams, rng, count: int) -> np.ndarray:
    """Uniform draws from the defect parametrization of the neighborhood."""
    x1 = rng.uniform(0.0, 1.0, count)
    d2 = rng.uniform(-1.0, 1.0, count) * params.defect2_tol * DEFECT_MARGIN
    d3 = rng.uniform(-1.0, 1.0, count) * params.defect3_tol * DEFECT_MARGIN
    x2 = x1**2 + d2
    x3 = 3.0 * x1 * x2 - 2.0 * x1**3 + d3
    return np.column_stack([x1, x2, x3])


def sample_block(block: CanonicalBlock, rng, count: int, dilation: float = 1.0) -> np.ndarray:
    """Draws from the block, optionally dilated about its center.

    Dilation acts on the slice/defect parametrization: the xi1 slice and both
    defect tolerances are widened by the factor about the block center.
    """
    s = float(block.s)
    center = (block.l + 0.5) / s
    x1 = center + (rng.uniform(0.0, 1.0, count) - 0.5) * dilation / s
    d2 = rng.uniform(-1.0, 1.0, count) * dilation * s**-2.0 * DEFECT_MARGIN
    d3 = rng.uniform(-1.0, 1.0, count) * dilation * s**-3.0 * DEFECT_MARGIN
    x2 = x1**2 + d2
    x3 = 3.0 * x1 * x2 - 2.0 * x1**3 + d3
    return np.column_stack([x1, x2, x3])


@dataclass(frozen=True)
class ParamBox:
    """Set {A gamma'(t0) + B gamma''(t0) + C gamma'''(t0)} with box ranges.

    two_sided_a selects the annular reading |A| in [a_lo, a_hi]; otherwise A
    ranges over the signed interval [a_lo, a_hi]. B and C are symmetric,
    |B| <= b_bound and |C| <= c_bound. The set is a span around the origin;
    t0 only fixes the frame.
    """

    t0: float
    a_lo: float
    a_hi: float
    b_bound: float
    c_bound: float
    two_sided_a: bool = True

    def __post_init__(self) -> None:
        if self.a_hi < self.a_lo:
            raise SpecValidationError("A range is empty")
        if self.two_sided_a and self.a_lo < 0:
            raise SpecValidationError("two-sided A range needs a_lo >= 0")
        if self.b_bound < 0 or self.c_bound < 0:
            raise SpecValidationError("B/C bounds must be nonnegative")

    def sample(self, rng, count: int) -> np.ndarray:
        """(count, 3) array of (A, B, C) coefficients, uniform in the box."""
        a = rng.uniform(self.a_lo, self.a_hi, count)
        if self.two_sided_a:
            a = a * rng.choice([-1.0, 1.0], count)
        b = rng.uniform(-self.b_bound, self.b_bound, count)
        c = rng.uniform(-self.c_bound, self.c_bound, count)
        return np.column_stack([a, b, c])

    def contains_abc(self, abc, slack: float = SLACK):
        abc = np.asarray(abc, dtype=float)
        a = abc[..., 0]
        if self.two_sided_a:
            mag = np.abs(a)
            ok_a = (mag >= self.a_lo * (1.0 - slack)) & (mag <= self.a_hi * (1.0 + slack))
        else:
            span = max(abs(self.a_lo), abs(self.a_hi), 1e-300)
            ok_a = (a >= self.a_lo - slack * span) & (a <= self.a_hi + slack * span)
        ok_b = np.abs(abc[..., 1]) <= self.b_bound * (1.0 + slack)
        ok_c = np.abs(abc[..., 2]) <= self.c_bound * (1.0 + slack)
        return ok_a & ok_b & ok_c

    def to_points(self, abc) -> np.ndarray:
        abc = np.asarray(abc, dtype=float)
        return abc @ frame_matrix(self.t0).T

    def dilated(self, factor: float) -> "ParamBox":
        """Concentric dilation about the box center (one-sided A only)."""
        if self.two_sided_a:
            raise SpecValidationError("dilation is defined for one-sided boxes")
        mid = 0.5 * (self.a_lo + self.a_hi)
        half = 0.5 * (self.a_hi - self.a_lo) * factor
        return ParamBox(
            t0=self.t0,
            a_lo=mid - half,
            a_hi=mid + half,
            b_bound=self.b_bound * factor,
            c_bound=self.c_bound * factor,
            two_sided_a=False,
        )


def gamma_tilde(r_k: float, r_next: float, R: float, l: int, c_eps: float = 1.0) -> ParamBox:
    """High-frequency difference box at t0 = l / r_k.

    Coefficient ranges: |A| in [1/(2 r_next), c_eps / r_k], |B| <= c_eps / r_k^2,
    |C| <= c_eps / R.
    """
    if not (1.0 <= r_k <= r_next):
        raise SpecValidationError("need 1 <= r_k <= r_next")
    if R <= 0 or c_eps <= 0:
        raise SpecValidationError("R and c_eps must be positive")
    if not (0 <= l < r_k):
        raise SpecValidationError("l must lie in [0, r_k)")
    a_lo = 0.5 / r_next
    a_hi = c_eps / r_k
    if a_lo > a_hi:
        raise SpecValidationError("empty A range; increase r_next or c_eps")
    return ParamBox(
        t0=l / r_k,
        a_lo=a_lo,
        a_hi=a_hi,
        b_bound=c_eps / r_k**2,
        c_bound=c_eps / R,
        two_sided_a=True,
    )


@dataclass(frozen=True)
class AffineMap3:
    """x -> matrix @ x + offset on R^3."""

    matrix: np.ndarray
    offset: np.ndarray

    def apply(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return points @ np.asarray(self.matrix).T + np.asarray(self.offset)

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.matrix))

    def inverse(self) -> "AffineMap3":
        if abs(self.det) < 1e-12:
            raise SpecValidationError("matrix determinant below invertibility floor")
        inv = np.linalg.inv(self.matrix)
        return AffineMap3(matrix=inv, offset=-inv @ np.asarray(self.offset))


def cone_map_T() -> AffineMap3:
    """Linear map (x,y,z) -> (y/2, (x - z/6)/sqrt 2, (x + z/6)/sqrt 2).

    Sends the derivative gamma'(t) to a point on the light cone
    {w3 = |(w1, w2)|}: the image is rho(t) (cos w, sin w, 1) with
    rho(t) = (1 + t^2/2)/sqrt 2.
    """
    m = np.array(
        [
            [0.0, 0.5, 0.0],
            [1.0 / SQRT2, 0.0, -1.0 / (6.0 * SQRT2)],
            [1.0 / SQRT2, 0.0, 1.0 / (6.0 * SQRT2)],
        ]
    )
    return AffineMap3(matrix=m, offset=np.zeros(3))


def cone_angle(t: float) -> float:
    """Angle w(t) of the cone direction of gamma'(t): strictly decreasing,
    w(0) = pi/2."""
    t = float(t)
    return math.atan2(2.0 - t * t, 2.0 * SQRT2 * t)


def cone_radius(t: float) -> float:
    """Radial coordinate rho(t) = (1 + t^2/2)/sqrt 2 of the cone image of
    gamma'(t)."""
    t = float(t)
    return (1.0 + 0.5 * t * t) / SQRT2


def rescale_map_L(r_prev: float, l: int) -> AffineMap3:
    """Affine renormalization of block l at scale r_prev^(1/3) to unit scale.

    With S = r_prev^(1/3) and t0 = l/S, the map sends gamma(t0 + u) to
    gamma(S u) exactly; both defects rescale exactly by S^2 and S^3. The
    linear part has diagonal (S, S^2, S^3), so for l = 0 the map is the pure
    diagonal scaling.
    """
    if r_prev < 1.0:
        raise SpecValidationError("r_prev must be >= 1")
    s = float(np.cbrt(r_prev))
    if not (0 <= l < s + SLACK):
        raise SpecValidationError("l must lie in [0, r_prev^(1/3))")
    t0 = l / s
    m = np.array(
        [
            [s, 0.0, 0.0],
            [-2.0 * t0 * s**2, s**2, 0.0],
            [3.0 * t0**2 * s**3, -3.0 * t0 * s**3, s**3],
        ]
    )
    base = np.array([t0, t0**2, t0**3])
    return AffineMap3(matrix=m, offset=-m @ base)


def _wrap_angle(x: np.ndarray) -> np.ndarray:
    return (x + math.pi) % (2.0 * math.pi) - math.pi


def _spread_l_indices(n_slots: int, rng, cap: int = 64) -> np.ndarray:
    if n_slots <= cap:
        return np.arange(n_slots)
    picked = rng.choice(n_slots, size=cap - 2, replace=False)
    return np.unique(np.concatenate([[0, n_slots - 1], picked]))


@dataclass(frozen=True)
class OverlapReport:
    threshold: float
    l_count: int
    samples_used: int
    pairs_checked: int
    far_pairs_checked: int
    max_multiplicity: int
    violations: int


def check_overlap_geo1(
    r_k: float,
    r_next: float,
    R: float,
    c_eps: float = 1.0,
    samples: int = 10000,
    seed: int = 0,
) -> OverlapReport:
    """Sampled overlap bound for the difference boxes gamma_tilde.

    Points drawn from the box at index l are tested for membership in the box
    at index l' by frame-coordinate inversion at t0' = l'/r_k. Nearby indices
    may overlap (multiplicity is reported); indices with
    |l - l'| > OVERLAP_FACTOR * c_eps * r_next / r_k must give zero hits,
    because the B-coordinate picks up the exact shear (t0 - t0') A whose
    magnitude then exceeds the combined B widths. Hits beyond the threshold
    count as violations.
    """
    rng = np.random.default_rng(seed)
    n_l = int(r_k)
    ls = _spread_l_indices(n_l, rng)
    per_l = max(1, samples // ls.size)
    threshold = OVERLAP_FACTOR * c_eps * (r_next / r_k)
    window = int(math.ceil(threshold)) + 2

    violations = 0
    max_mult = 0
    pairs = 0
    far_pairs = 0
    used = 0
    for l in ls:
        box = gamma_tilde(r_k, r_next, R, int(l), c_eps)
        pts = box.to_points(box.sample(rng, per_l))
        used += per_l
        near = np.arange(max(0, l - window), min(n_l, l + window + 1))
        mult = np.zeros(per_l, dtype=int)
        for lp in near:
            other = gamma_tilde(r_k, r_next, R, int(lp), c_eps)
            abc = frame_coordinates(other.t0, pts)
            mult += other.contains_abc(abc).astype(int)
            pairs += 1
        max_mult = max(max_mult, int(mult.max()))
        far_candidates = np.concatenate(
            [np.arange(0, max(0, l - window)), np.arange(min(n_l, l + window + 1), n_l)]
        )
        if far_candidates.size:
            probe = rng.choice(far_candidates, size=min(8, far_candidates.size), replace=False)
            for lp in probe:
                other = gamma_tilde(r_k, r_next, R, int(lp), c_eps)
                abc = frame_coordinates(other.t0, pts)
                hits = int(np.count_nonzero(other.contains_abc(abc)))
                violations += hits
                far_pairs += 1
    return OverlapReport(
        threshold=threshold,
        l_count=int(ls.size),
        samples_used=used,
        pairs_checked=pairs,
        far_pairs_checked=far_pairs,
        max_multiplicity=max_mult,
        violations=violations,
    )


@dataclass(frozen=True)
class ConeReport:
    case: str
    r: float
    beta1: float | None
    angular_halfwidth: float
    radial_width: float
    cap_count: int
    caps_touched: int
    max_caps_per_l: int
    l_count: int
    samples_used: int
    skipped_l: int
    violations: int
    max_angular_ratio: float
    max_radial_ratio: float


def _default_dilation_r(a_hi: float, margin: float) -> float:
    """Largest dyadic 1/r below the reachable top of the third coordinate."""
    z_hi = a_hi / SQRT2 - margin
    if z_hi <= 0:
        raise SpecValidationError("box too thin for any slab; reduce margins")
    j = math.ceil(-math.log2(z_hi))
    return 2.0**j


def _cone_slab_check(
    boxes: list[ParamBox],
    r: float,
    w_ang: float,
    w_rad: float,
    rng,
    per_l: int,
    case: str,
    beta1: float | None,
) -> ConeReport:
    """Common core of the cone containment checks.

    For each frame box, draws points conditioned to the slab
    1/(2r) <= third cone coordinate <= 1/r, dilates the cone image by r, and
    verifies the angular deviation from the box's center direction stays
    within w_ang and the distance to the light cone within w_rad. Sampling is
    z-first: the slab coordinate is drawn uniformly and the A coefficient
    solved from it, so every draw lands in the slab; boxes whose A range
    cannot reach the slab are skipped and counted.
    """
    t_map = cone_map_T()
    slab_lo, slab_hi = 0.5 / r, 1.0 / r
    violations = 0
    used = 0
    skipped = 0
    max_ang = 0.0
    max_rad = 0.0
    touched: set[int] = set()
    max_caps_per_l = 0
    for box in boxes:
        t0 = box.t0
        rho = cone_radius(t0)
        margin = box.b_bound * t0 / SQRT2 + box.c_bound / SQRT2
        z_lo = max(slab_lo, box.a_lo * rho + margin)
        z_hi = min(slab_hi, box.a_hi * rho - margin)
        if z_lo >= z_hi:
            skipped += 1
            continue
        z = rng.uniform(z_lo, z_hi, per_l)
        b = rng.uniform(-box.b_bound, box.b_bound, per_l)
        c = rng.uniform(-box.c_bound, box.c_bound, per_l)
        a = (z - b * t0 / SQRT2 - c / SQRT2) / rho
        pts = box.to_points(np.column_stack([a, b, c]))
        y = r * t_map.apply(pts)
        used += per_l

        zeta = np.arctan2(y[:, 1], y[:, 0])
        dev = np.abs(_wrap_angle(zeta - cone_angle(t0)))
        radial = np.abs(np.hypot(y[:, 0], y[:, 1]) - y[:, 2])
        height_ok = (y[:, 2] >= 0.5 * (1.0 - SLACK)) & (y[:, 2] <= 1.0 + SLACK)
        ang_ok = dev <= 0.5 * w_ang * (1.0 + SLACK)
        rad_ok = radial <= w_rad * (1.0 + SLACK)
        violations += int(np.count_nonzero(~(height_ok & ang_ok & rad_ok)))
        max_ang = max(max_ang, float(np.max(dev / (0.5 * w_ang))))
        max_rad = max(max_rad, float(np.max(radial / w_rad)))
        cells = np.unique(np.floor(zeta / w_ang).astype(int))
        touched.update(int(v) for v in cells)
        max_caps_per_l = max(max_caps_per_l, int(cells.size))
    cap_count = int(math.ceil(2.0 * math.pi / w_ang))
    return ConeReport(
        case=case,
        r=r,
        beta1=beta1,
        angular_halfwidth=0.5 * w_ang,
        radial_width=w_rad,
        cap_count=cap_count,
        caps_touched=len(touched),
        max_caps_per_l=max_caps_per_l,
        l_count=len(boxes),
        samples_used=used,
        skipped_l=skipped,
        violations=violations,
        max_angular_ratio=max_ang,
        max_radial_ratio=max_rad,
    )


def check_cone_containment_geo2(
    r_k: float,
    r_next: float,
    R: float,
    c_eps: float = 1.0,
    r: float | None = None,
    samples: int = 10000,
    seed: int = 0,
) -> ConeReport:
    """Cone containment for r-dilated slab sections of the gamma_tilde boxes.

    Case 1 applies when r_k >= sqrt(R): cap dimensions are
    WIDTH_FACTOR * c_eps * (r/R) in both angle and cone distance. Otherwise
    case 2 applies with beta1 = log(r_k) / log(R / r_k) (required to lie in
    [1/2, 1]); the angular width becomes WIDTH_FACTOR * c_eps * (r/R)^beta1
    and the cone-distance width WIDTH_FACTOR * c_eps^(1/beta1) * (r/R).

    r is a dyadic dilation whose inverse must lie between 1/r_next and
    20 * c_eps / r_k; when omitted, the largest dyadic slab reachable by
    every box's A range is used.
    """
    rng = np.random.default_rng(seed)
    if r_k >= math.sqrt(R):
        case, beta1 = "1", None
    else:
        beta1 = math.log(r_k) / math.log(R / r_k)
        if not (0.5 - SLACK <= beta1 <= 1.0 + SLACK):
            raise SpecValidationError(
                f"case 2 requires beta1 in [1/2, 1]; got {beta1:.4f}"
            )
        case = "2"
    probe = gamma_tilde(r_k, r_next, R, 0, c_eps)
    if r is None:
        margin = probe.b_bound / SQRT2 + probe.c_bound / SQRT2
        r = _default_dilation_r(probe.a_hi, margin)
    if 2.0 ** round(math.log2(r)) != r:
        raise SpecValidationError("r must be dyadic")
    if not (1.0 / r_next - SLACK <= 1.0 / r <= 20.0 * c_eps / r_k + SLACK):
        raise SpecValidationError("1/r must lie in [1/r_next, 20 c_eps / r_k]")

    if case == "1":
        w_ang = WIDTH_FACTOR * c_eps * (r / R)
        w_rad = WIDTH_FACTOR * c_eps * (r / R)
    else:
        w_ang = WIDTH_FACTOR * c_eps * (r / R) ** beta1
        w_rad = WIDTH_FACTOR * c_eps ** (1.0 / beta1) * (r / R)

    ls = _spread_l_indices(int(r_k), rng)
    per_l = max(1, samples // ls.size)
    boxes = [gamma_tilde(r_k, r_next, R, int(l), c_eps) for l in ls]
    return _cone_slab_check(boxes, r, w_ang, w_rad, rng, per_l, case, beta1)


@dataclass(frozen=True)
class CanonicalConeReport:
    r: float
    angular_halfwidth: float
    radial_width: float
    block_count: int
    l_count: int
    samples_used: int
    rejected: int
    violations: int
    max_angular_ratio: float
    max_radial_ratio: float
    min_angle_gap_ratio: float


def check_cone_containment_geo3(
    r_k_scale: float,
    r_next_scale: float,
    r: float | None = None,
    c_eps: float = 1.0,
    samples: int = 10000,
    seed: int = 0,
) -> CanonicalConeReport:
    """Cone containment for differences within dilated canonical blocks.

    Blocks live at scale s = r_k_scale^(1/3) (an integer cube root is
    required). Pairs are drawn from the c_eps-dilated block, differences
    smaller than r_next_scale^(-1/3) are rejected (the removed ball), the
    difference is pushed through the cone map, restricted to the slab
    [1/(2r), 1/r] in the third coordinate, and dilated by r. The target block
    has angular width WIDTH_FACTOR * c_eps * r * r_k_scale^(-2/3) and
    cone-distance width WIDTH_FACTOR * c_eps^2 * r^2 * r_k_scale^(-4/3)
    around the angle of the block's base parameter. The inverse dilation 1/r
    must lie in [r_next_scale^(-1/3), c_eps * r_k_scale^(-1/3)].
    """
    rng = np.random.default_rng(seed)
    s = round(r_k_scale ** (1.0 / 3.0))
    if s**3 != round(r_k_scale) or s < 2:
        raise SpecValidationError("r_k_scale must be a perfect cube >= 8")
    if r_next_scale <= r_k_scale:
        raise SpecValidationError("need r_next_scale > r_k_scale")
    r_lo = r_k_scale ** (1.0 / 3.0) / c_eps
    r_hi = r_next_scale ** (1.0 / 3.0)
    if r is None:
        r = 2.0 ** round(0.5 * (math.log2(r_lo) + math.log2(r_hi)))
    if 2.0 ** round(math.log2(r)) != r:
        raise SpecValidationError("r must be dyadic")
    if not (r_lo * (1.0 - SLACK) <= r <= r_hi * (1.0 + SLACK)):
        raise SpecValidationError(
            "1/r must lie in [r_next_scale^(-1/3), c_eps * r_k_scale^(-1/3)]"
        )

    w_ang = WIDTH_FACTOR * c_eps * r * r_k_scale ** (-2.0 / 3.0)
    w_rad = WIDTH_FACTOR * c_eps**2 * r**2 * r_k_scale ** (-4.0 / 3.0)
    ball = r_next_scale ** (-1.0 / 3.0)
    slab_lo, slab_hi = 0.5 / r, 1.0 / r
    t_map = cone_map_T()

    ls = _spread_l_indices(s, rng)
    per_l = max(1, samples // ls.size)
    violations = 0
    used = 0
    rejected = 0
    max_ang = 0.0
    max_rad = 0.0
    for l in ls:
        block = CanonicalBlock(s=s, l=int(l))
        t0 = block.t0
        center = cone_angle(t0)
        kept = 0
        batches = 0
        while kept < per_l and batches < 200:
            batches += 1
            draw = 4 * per_l
            delta = sample_block(block, rng, draw, dilation=c_eps) - sample_block(
                block, rng, draw, dilation=c_eps
            )
            norms = np.linalg.norm(delta, axis=1)
            q = t_map.apply(delta)
            keep = (norms >= ball) & (q[:, 2] >= slab_lo) & (q[:, 2] <= slab_hi)
            rejected += int(np.count_nonzero(~keep))
            q = q[keep][: per_l - kept]
            if q.size == 0:
                continue
            kept += q.shape[0]
            y = r * q
            zeta = np.arctan2(y[:, 1], y[:, 0])
            dev = np.abs(_wrap_angle(zeta - center))
            radial = np.abs(np.hypot(y[:, 0], y[:, 1]) - y[:, 2])
            ang_ok = dev <= 0.5 * w_ang * (1.0 + SLACK)
            rad_ok = radial <= w_rad * (1.0 + SLACK)
            violations += int(np.count_nonzero(~(ang_ok & rad_ok)))
            max_ang = max(max_ang, float(np.max(dev / (0.5 * w_ang))))
            max_rad = max(max_rad, float(np.max(radial / w_rad)))
        used += kept

    angles = np.array([cone_angle(l / s) for l in range(s)])
    gaps = np.abs(np.diff(angles))
    min_gap_ratio = float(np.min(gaps) * s) if gaps.size else math.inf
    return CanonicalConeReport(
        r=r,
        angular_halfwidth=0.5 * w_ang,
        radial_width=w_rad,
        block_count=s,
        l_count=int(ls.size),
        samples_used=used,
        rejected=rejected,
        violations=violations,
        max_angular_ratio=max_ang,
        max_radial_ratio=max_rad,
        min_angle_gap_ratio=min_gap_ratio,
    )


@dataclass(frozen=True)
class RescaleReport:
    scale: float
    max_curve_residual: float
    max_roundtrip_residual: float
    member_samples: int
    member_violations: int


def check_rescale(
    r_prev: float,
    l: int,
    params: DecouplingParams | None = None,
    samples: int = 10000,
    seed: int = 0,
) -> RescaleReport:
    """Verify the renormalization map on the curve, as a bijection, and on
    the neighborhood.

    Checks, with S = r_prev^(1/3) and t0 = l/S: (a) L(gamma(t0 + t/S)) =
    gamma(t) at random t in [0,1]; (b) L composed with its inverse is the
    identity on random points; (c) when params is given, mapped samples of
    block(l) intersected with the neighborhood stay inside the rescaled
    neighborhood (defect tolerances multiplied by S^2 and S^3 exactly).
    """
    rng = np.random.default_rng(seed)
    lmap = rescale_map_L(r_prev, l)
    s = float(np.cbrt(r_prev))
    t0 = l / s

    t = rng.uniform(0.0, 1.0, 100)
    lhs = lmap.apply(curve_point(t0 + t / s))
    residual = float(np.max(np.abs(lhs - curve_point(t))))

    pts = rng.uniform(-1.0, 1.0, (256, 3))
    back = lmap.inverse().apply(lmap.apply(pts))
    roundtrip = float(np.max(np.abs(back - pts)))

    member_violations = 0
    member_samples = 0
    if params is not None:
        s_int = round(s)
        if s_int**3 != round(r_prev):
            raise SpecValidationError("membership check needs an integer cube root")
        block = CanonicalBlock(s=s_int, l=l)
        x1 = t0 + rng.uniform(0.0, 1.0, samples) / s
        d2 = rng.uniform(-1.0, 1.0, samples) * min(params.defect2_tol, s**-2.0) * DEFECT_MARGIN
        d3 = rng.uniform(-1.0, 1.0, samples) * min(params.defect3_tol, s**-3.0) * DEFECT_MARGIN
        x2 = x1**2 + d2
        x3 = 3.0 * x1 * x2 - 2.0 * x1**3 + d3
        xi = np.column_stack([x1, x2, x3])
        if not bool(np.all(block.contains(xi, slack=SLACK))):
            raise SpecValidationError("internal sampling error: draws left the block")
        target_s_cap = params.r_scale**params.beta / s
        target_r = params.r_scale / r_prev
        if target_s_cap < 1.0 or target_r < 1.0:
            raise SpecValidationError("rescaled neighborhood is coarser than unit scale")
        mapped = lmap.apply(xi)
        ok1 = (mapped[:, 0] >= -SLACK) & (mapped[:, 0] <= 1.0 + SLACK)
        ok2 = np.abs(defect2(mapped)) <= target_s_cap ** (-2.0) * (1.0 + SLACK)
        ok3 = np.abs(defect3(mapped)) <= (1.0 / target_r) * (1.0 + SLACK)
        member_violations = int(np.count_nonzero(~(ok1 & ok2 & ok3)))
        member_samples = samples

    return RescaleReport(
        scale=s,
        max_curve_residual=residual,
        max_roundtrip_residual=roundtrip,
        member_samples=member_samples,
        member_violations=member_violations,
    )


@dataclass(frozen=True)
class PartitionReport:
    samples_used: int
    violations: int


def check_partition(params: DecouplingParams, samples: int = 100000, seed: int = 0) -> PartitionReport:
    """Every sampled member lands in exactly one cap.

    Membership is tested literally against the cap at the computed index and
    its two neighbors (slices at distance >= 2 cannot contain the point since
    the xi1 windows are disjoint); exactly one may contain it, with
    slack 0 so shared boundaries cannot double-count.
    """
    rng = np.random.default_rng(seed)
    xi = sample_neighborhood(params, rng, samples)
    idx = cap_index_of(params, xi)
    violations = int(np.count_nonzero(idx < 0))
    member = idx >= 0
    xi = xi[member]
    idx = idx[member]
    width = params.cap_width
    for off in (-1, 0, 1):
        j = idx + off
        valid = (j >= 0) & (j < params.n_caps)
        lo = j * width
        in_slice = valid & (xi[:, 0] >= lo) & (xi[:, 0] < lo + width)
        last = j == params.n_caps - 1
        in_slice |= valid & last & (xi[:, 0] >= lo) & (xi[:, 0] <= 1.0)
        if off == 0:
            violations += int(np.count_nonzero(~in_slice))
        else:
            violations += int(np.count_nonzero(in_slice))
    return PartitionReport(samples_used=samples, violations=violations)


@dataclass(frozen=True)
class ComparabilityReport:
    samples_used: int
    outer_violations: int
    inner_violations: int


def check_cap_frame_comparability(
    r_k: float,
    R: float,
    l: int,
    samples: int = 10000,
    seed: int = 0,
    factor: float = COMPARABILITY_FACTOR,
) -> ComparabilityReport:
    """Sandwich the cap between contracted and dilated frame boxes.

    The reference box at t0 = l/r_k has A in [0, 1/r_k], |B| <= 1/r_k^2,
    |C| <= 1/R around the base point gamma(t0). Outer direction: every
    sampled cap member, expressed in frame coordinates, lies in the
    factor-dilated box. Inner direction: every sample of the (1/factor)-
    contracted box satisfies the cap inequalities. Comparability is a ladder
    property: the cubic defect of a frame-box point is 2A^3 + O(AB, C), about
    1/(4 r_k^3), so the |C| <= 1/R reading needs r_k >= R^(1/3).
    """
    if r_k < 2.0 or R < r_k:
        raise SpecValidationError("need 2 <= r_k <= R")
    if r_k < R ** (1.0 / 3.0) * (1.0 - SLACK):
        raise SpecValidationError("comparability needs r_k >= R^(1/3)")
    rng = np.random.default_rng(seed)
    t0 = l / r_k
    base = curve_point(t0)
    box = ParamBox(
        t0=t0, a_lo=0.0, a_hi=1.0 / r_k, b_bound=r_k**-2.0, c_bound=1.0 / R,
        two_sided_a=False,
    )

    n = samples
    x1 = t0 + rng.uniform(0.0, 1.0, n) / r_k
    d2 = rng.uniform(-1.0, 1.0, n) * r_k**-2.0
    d3 = rng.uniform(-1.0, 1.0, n) / R
    x2 = x1**2 + d2
    x3 = 3.0 * x1 * x2 - 2.0 * x1**3 + d3
    xi = np.column_stack([x1, x2, x3])
    abc = frame_coordinates(t0, xi - base)
    outer = box.dilated(factor)
    outer_violations = int(np.count_nonzero(~outer.contains_abc(abc)))

    inner = box.dilated(1.0 / factor)
    pts = base + inner.to_points(inner.sample(rng, n))
    w = 1.0 / r_k
    ok1 = (pts[:, 0] >= t0 - SLACK * w) & (pts[:, 0] <= t0 + w * (1.0 + SLACK))
    ok2 = np.abs(defect2(pts)) <= r_k**-2.0 * (1.0 + SLACK)
    ok3 = np.abs(defect3(pts)) <= (1.0 / R) * (1.0 + SLACK)
    inner_violations = int(np.count_nonzero(~(ok1 & ok2 & ok3)))
    return ComparabilityReport(
        samples_used=2 * n,
        outer_violations=outer_violations,
        inner_violations=inner_violations,
    )


def default_geo1_scales(R: float, beta: float) -> tuple[float, float]:
    """Dyadic ladder pair (r_k, 2 r_k) between R^(1/3) and R^beta."""
    lo = math.log2(R) / 3.0
    hi = beta * math.log2(R)
    mid = 2.0 ** round(0.5 * (lo + hi))
    r_k = min(max(mid, 2.0 ** math.ceil(lo)), 2.0 ** math.floor(hi))
    return r_k, 2.0 * r_k


def default_geo2_scales(R: float, beta: float, case: str) -> tuple[float, float]:
    """Dyadic (r_k, 2 r_k) for the requested containment case.

    Case 1 needs r_k >= sqrt(R) (and <= R^beta, so beta >= 1/2); case 2
    needs log(r_k)/log(R/r_k) in [1/2, 1], i.e. r_k between R^(1/3) and
    sqrt(R).
    """
    lg = math.log2(R)
    if case == "1":
        if beta < 0.5:
            raise SpecValidationError("case 1 requires beta >= 1/2")
        r_k = 2.0 ** round(lg * (0.5 + beta) / 2.0)
        r_k = min(max(r_k, 2.0 ** math.ceil(lg / 2.0)), 2.0 ** math.floor(lg * beta))
    elif case == "2":
        r_k = 2.0 ** round(lg * 5.0 / 12.0)
        r_k = min(max(r_k, 2.0 ** math.ceil(lg / 3.0 + SLACK)), 2.0 ** math.floor(lg / 2.0))
    else:
        raise SpecValidationError("case must be '1' or '2'")
    return r_k, 2.0 * r_k


def default_geo3_scales(R: float) -> tuple[float, float]:
    """Adjacent rungs (8^j, 8^(j+1)) of the cube ladder near sqrt(R)."""
    j = max(1, round(math.log(R, 8.0) / 2.0))
    return 8.0**j, 8.0 ** (j + 1)
