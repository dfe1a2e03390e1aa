"""cu-blender construction and certification.

The blender is certified through the one-dimensional center covering
criterion: two branch returns with expanding center whose images of a
closed center interval I_c jointly cover I_c with positive margin.  Strips
almost tangent to E^c + E^uu that cross the region are then shown to meet
W^s of the owning periodic point by nested inverse-branch bookkeeping on
the center interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import intervals as iv
from .core_affine import (
    AUDIT_TOL,
    BlockAffineMap,
    Box,
    ChartPoint,
    apply_map,
    compose_chain,
    iterate,
    map_box,
)
from .errors import ConvergenceError, ModelInvariantError, NoSolutionError
from .periodic_orbits import PeriodicOrbitRecord, StrongHomoclinicCertificate
from .perturbation import UnfoldedCycle, perturb_map_conservative

WITNESS_TOL = 1e-8


@dataclass(frozen=True)
class BlenderRegion:
    """The set Bl^cu(p): an su-box times a closed center interval I_c.

    Both branches must expand the center and act Markovianly on the
    su-extent of the region (stable image inside, unstable image across).
    """

    region: Box
    center_interval: tuple
    branches: tuple
    cone_params: tuple = (0.1, 0.1)
    strip_radius_ratio: float = 10.0
    owner: PeriodicOrbitRecord | None = None
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(
            self,
            "center_interval",
            (float(self.center_interval[0]), float(self.center_interval[1])),
        )
        lo, hi = self.center_interval
        if lo > hi:
            raise ValueError("empty center interval")
        if len(self.branches) != 2:
            raise ValueError("exactly two branches required")
        s = self.branches[0].dims.s
        if not (self.region.lo[s] <= lo and hi <= self.region.hi[s]):
            raise ModelInvariantError("center interval leaves the region box")
        for i, br in enumerate(self.branches):
            if not abs(br.c) > 1.0:
                raise ModelInvariantError(
                    f"branch R{i + 1} center multiplier {br.c} is not expanding"
                )
            image = map_box(br, self.region)
            if not (
                np.all(image.lo[:s] >= self.region.lo[:s] - AUDIT_TOL)
                and np.all(image.hi[:s] <= self.region.hi[:s] + AUDIT_TOL)
            ):
                raise ModelInvariantError(
                    f"branch R{i + 1} stable image escapes the region"
                )
            if not (
                np.all(image.lo[s + 1 :] <= self.region.lo[s + 1 :] + AUDIT_TOL)
                and np.all(image.hi[s + 1 :] >= self.region.hi[s + 1 :] - AUDIT_TOL)
            ):
                raise ModelInvariantError(
                    f"branch R{i + 1} unstable image does not cross the region"
                )

    @property
    def dims(self):
        return self.branches[0].dims

    @property
    def su_radius(self) -> float:
        s = self.dims.s
        r = self.region.radius
        return float(max(np.max(r[: s]), np.max(r[s + 1 :])))

    def center_map(self, i: int):
        """The i-th branch acting on the center line: y -> c y + by."""
        br = self.branches[i]
        return br.c, br.by


@dataclass(frozen=True)
class Strip:
    """A (u+1)-disk graphed over the center x unstable coordinates.

    x(y, z) = base.x + slope_y (y - base.y) + slope_z (z - base.z); the
    core u-disc is the z-slice through y = base.y + core_tilt . (z - base.z).
    """

    base: ChartPoint
    u_radius: float
    center_extent: tuple
    slope_y: np.ndarray
    slope_z: np.ndarray
    core_tilt: np.ndarray

    def __post_init__(self):
        dims = self.base.dims
        slope_y = np.atleast_1d(np.asarray(self.slope_y, dtype=float))
        slope_z = np.atleast_2d(np.asarray(self.slope_z, dtype=float))
        core_tilt = np.atleast_1d(np.asarray(self.core_tilt, dtype=float))
        if slope_y.shape != (dims.s,) or slope_z.shape != (dims.s, dims.u):
            raise ValueError("graph slope shapes do not match the splitting")
        if core_tilt.shape != (dims.u,):
            raise ValueError("core tilt shape does not match the splitting")
        if not (
            np.all(np.isfinite(slope_y))
            and np.all(np.isfinite(slope_z))
            and np.all(np.isfinite(core_tilt))
        ):
            raise ValueError("strip slopes must be finite")
        if self.u_radius <= 0.0:
            raise ValueError("core u-disc radius must be positive")
        for arr in (slope_y, slope_z, core_tilt):
            arr.setflags(write=False)
        object.__setattr__(self, "slope_y", slope_y)
        object.__setattr__(self, "slope_z", slope_z)
        object.__setattr__(self, "core_tilt", core_tilt)
        object.__setattr__(
            self,
            "center_extent",
            (float(self.center_extent[0]), float(self.center_extent[1])),
        )

    def x_at(self, y: float, z: np.ndarray) -> np.ndarray:
        return (
            self.base.x
            + self.slope_y * (y - self.base.y)
            + self.slope_z @ (np.asarray(z, dtype=float) - self.base.z)
        )

    def point_at(self, y: float, z: np.ndarray) -> ChartPoint:
        return ChartPoint(self.base.chart, self.x_at(y, z), y, z)

    @property
    def cu_tilt(self) -> float:
        """Largest graph slope out of E^c + E^uu."""
        return float(
            max(np.max(np.abs(self.slope_y)), np.max(np.abs(self.slope_z)), 0.0)
        )

    @property
    def core_uu_tilt(self) -> float:
        """Largest core-disc slope out of E^uu."""
        dx = np.max(np.abs(self.slope_z)) if self.slope_z.size else 0.0
        return float(max(np.max(np.abs(self.core_tilt)), dx))


@dataclass(frozen=True)
class WellPlaced:
    ok: bool
    reasons: tuple

    def __bool__(self) -> bool:
        return self.ok


def is_well_placed(region: BlenderRegion, strip: Strip) -> WellPlaced:
    """Definition checks: in-region core, big radius, small tilts."""
    reasons = []
    alpha_uu, alpha_cu = region.cone_params
    if not region.region.contains_point(strip.base):
        reasons.append("core u-disc center outside the region")
    lo, hi = region.center_interval
    if not (strip.center_extent[0] <= lo and hi <= strip.center_extent[1]):
        reasons.append("center extent does not span I_c")
    if strip.u_radius < region.strip_radius_ratio * region.su_radius:
        reasons.append(
            f"u-disc radius {strip.u_radius} below "
            f"{region.strip_radius_ratio} x region radius {region.su_radius}"
        )
    if strip.cu_tilt > alpha_cu:
        reasons.append(f"tilt {strip.cu_tilt} exceeds cu-cone opening {alpha_cu}")
    if strip.core_uu_tilt > alpha_uu:
        reasons.append(
            f"core tilt {strip.core_uu_tilt} exceeds uu-cone opening {alpha_uu}"
        )
    return WellPlaced(ok=not reasons, reasons=tuple(reasons))


@dataclass(frozen=True)
class BlenderCertificate:
    covered: bool
    margin: float
    margin_lower_bound: float
    interval: tuple
    images_outer: tuple
    images_inner: tuple
    gap: tuple | None = None
    robustness: "RobustnessReport | None" = None

    @property
    def covering_margin(self) -> float:
        return self.margin


def _coverage_depth(y: float, images) -> float:
    """Depth of containment of y in the union (negative outside)."""
    return max(min(y - lo, hi - y) for lo, hi in images)


def _min_coverage(interval, images) -> tuple[float, float]:
    """(min depth over the interval, argmin); exact for piecewise-linear depth."""
    lo, hi = interval
    candidates = {lo, hi}
    endpoints = [e for img in images for e in img]
    for i, a in enumerate(endpoints):
        for b in endpoints[i:]:
            candidates.add(0.5 * (a + b))
    best_y, best = lo, math.inf
    for y in sorted(candidates):
        if not (lo <= y <= hi):
            continue
        d = _coverage_depth(y, images)
        if d < best:
            best, best_y = d, y
    return best, best_y


def _locate_gap(interval, images) -> tuple | None:
    lo, hi = interval
    covered = sorted(
        (max(a, lo), min(b, hi)) for a, b in images if b >= lo and a <= hi
    )
    cursor = lo
    for a, b in covered:
        if a > cursor:
            return (cursor, a)
        cursor = max(cursor, b)
    if cursor < hi:
        return (cursor, hi)
    return None


def verify_covering(region: BlenderRegion) -> BlenderCertificate:
    """Certify I_c subset R1(I_c) union R2(I_c) on the center line.

    The reported margin uses nearest arithmetic (exact for dyadic data);
    margin_lower_bound shrinks every image endpoint inward by the rounding
    slack, so it is a certified floating-point lower bound.
    """
    interval = region.center_interval
    ic = iv.RInterval(*interval)
    outer, inner = [], []
    for i in range(2):
        c, b = region.center_map(i)
        img = iv.affine_image(ic, c, b)
        outer.append((img.lo, img.hi))
        ends = sorted((c * ic.lo + b, c * ic.hi + b))
        inner.append((iv.up(iv.up(ends[0])), iv.down(iv.down(ends[1]))))
    images_nearest = [
        tuple(sorted((region.center_map(i)[0] * interval[0] + region.center_map(i)[1],
                      region.center_map(i)[0] * interval[1] + region.center_map(i)[1])))
        for i in range(2)
    ]

    if interval[0] == interval[1]:
        y = interval[0]
        hit = any(lo <= y <= hi for lo, hi in images_nearest)
        return BlenderCertificate(
            covered=hit,
            margin=0.0,
            margin_lower_bound=0.0,
            interval=interval,
            images_outer=tuple(outer),
            images_inner=tuple(inner),
            gap=None if hit else (y, y),
        )

    margin, worst_y = _min_coverage(interval, images_nearest)
    margin_lb, _ = _min_coverage(interval, inner)
    covered = margin > 0.0
    gap = None if covered else _locate_gap(interval, images_nearest) or (worst_y, worst_y)
    return BlenderCertificate(
        covered=covered,
        margin=float(margin),
        margin_lower_bound=float(margin_lb),
        interval=interval,
        images_outer=tuple(outer),
        images_inner=tuple(inner),
        gap=gap,
    )


def build_blender(
    model: UnfoldedCycle,
    owner: PeriodicOrbitRecord,
    cert_in: StrongHomoclinicCertificate,
    k: int,
) -> BlenderRegion:
    """Blender region at a periodic point with expanding center.

    R1 is the owner's return map iterated until its center multiplier
    exceeds 1; R2 is the secondary return owner-partner-owner through the
    strong homoclinic connection.  The region box is shrunk geometrically
    until both branches satisfy the Markov invariant.
    """
    if not abs(owner.center_eigenvalue) > 1.0:
        raise ModelInvariantError(
            f"owner center eigenvalue {owner.center_eigenvalue} is not expanding"
        )
    if cert_in.max_residual > WITNESS_TOL:
        raise ModelInvariantError(
            f"homoclinic certificate residual {cert_in.max_residual:.3e} > 1e-8"
        )
    G_own = owner.return_map.G
    G_part = cert_in.partner.return_map.G

    r1 = None
    for j in range(1, k + 1):
        cand = iterate(G_own, j)
        if abs(cand.c) > 1.0:
            r1 = cand
            break
    if r1 is None:
        raise NoSolutionError(
            f"no iterate up to k={k} has expanding center", best_residual=math.inf
        )
    r2 = None
    for j in range(1, k + 1):
        outer_it = iterate(G_own, j)
        cand = compose_chain([outer_it, G_part, outer_it])
        if abs(cand.c) > 1.0:
            r2 = cand
            break
    if r2 is None:
        raise NoSolutionError(
            f"no secondary return up to k={k} has expanding center",
            best_residual=math.inf,
        )

    yp = model.y_plus
    dims = G_own.dims
    for radius in (0.5, 0.25, 0.1, 0.05, 0.02):
        h = radius / 2.0
        lo = np.concatenate([-radius * np.ones(dims.s), [yp - h], -radius * np.ones(dims.u)])
        hi = np.concatenate([radius * np.ones(dims.s), [yp + h], radius * np.ones(dims.u)])
        box = Box("P", lo, hi, "Bl^cu")
        if not model.U_P.contains_box(box):
            continue
        try:
            region = BlenderRegion(
                region=box,
                center_interval=(yp - h, yp + h),
                branches=(r1, r2),
                owner=owner,
                t=model.t,
            )
        except ModelInvariantError:
            continue
        cert = verify_covering(region)
        if not cert.covered:
            raise NoSolutionError(
                "branch images of I_c fail to overlap; unfolding t outside "
                "the blender-forming window",
                best_residual=abs(cert.margin),
            )
        if not region.region.contains_point(owner.point, tol=AUDIT_TOL):
            continue
        return region
    raise NoSolutionError(
        f"no region size satisfies the Markov property within budget k={k}",
        best_residual=math.inf,
    )


@dataclass(frozen=True)
class IntersectionWitness:
    point: ChartPoint
    word: tuple
    depth: int
    distance: float
    transversality_rank: int
    center_widths: tuple


def _stable_distance(
    owner: PeriodicOrbitRecord,
    region: BlenderRegion,
    point: ChartPoint,
    word: tuple,
) -> float:
    """Upper bound on the distance from point to W^s(owner).

    Forward-iterates the point along the chosen branch word; the distance
    to the pulled-back local stable slice after j steps is at most the
    transverse distance at step j divided by the accumulated minimal
    expansion, since the branch inverses contract transversally.
    """
    target = owner.point
    expanding = owner.center_expanding

    def transverse(p, denom_y, denom_z):
        dz = np.linalg.norm(p.z - target.z) / denom_z
        if expanding:
            dy = abs(p.y - target.y) / denom_y
            return math.hypot(dy, dz)
        return dz

    best = transverse(point, 1.0, 1.0)
    p = point
    denom_y = denom_z = 1.0
    for i in word:
        br = region.branches[i]
        p = apply_map(br, p)
        denom_y *= abs(br.c)
        denom_z *= float(np.min(np.linalg.svd(br.U, compute_uv=False)))
        best = min(best, transverse(p, denom_y, denom_z))
    return float(best)


def _transversality_rank(
    owner: PeriodicOrbitRecord, strip: Strip
) -> int:
    dims = strip.base.dims
    s, u = dims.s, dims.u
    rows = [np.concatenate([strip.slope_y, [1.0], np.zeros(u)])]
    for j in range(u):
        e = np.zeros(u)
        e[j] = 1.0
        rows.append(np.concatenate([strip.slope_z[:, j], [0.0], e]))
    for i in range(s):
        e = np.zeros(dims.n)
        e[i] = 1.0
        rows.append(e)
    if not owner.center_expanding:
        e = np.zeros(dims.n)
        e[s] = 1.0
        rows.append(e)
    return int(np.linalg.matrix_rank(np.vstack(rows)))


def strip_intersect_ws(
    region: BlenderRegion,
    strip: Strip,
    owner: PeriodicOrbitRecord,
    max_depth: int,
    tol: float = WITNESS_TOL,
) -> IntersectionWitness:
    """Find a point of the strip within tol of W^s(owner).

    Itinerary bisection on the center line: Y_k is the parameter interval
    of strip points whose first k branch images keep the center inside
    I_c; the branch with the larger crossing slack is appended each step
    (ties toward R1).  The witness is the center of Y_k lifted to the
    strip, with the unstable coordinate pulled back so the forward orbit
    tracks the region core.
    """
    placed = is_well_placed(region, strip)
    if not placed:
        raise ModelInvariantError(
            "strip is not well placed: " + "; ".join(placed.reasons)
        )
    cert = verify_covering(region)
    if not cert.covered:
        raise ModelInvariantError("covering certificate absent: region not covered")

    dims = region.dims
    s = dims.s
    rank = _transversality_rank(owner, strip)
    if rank != dims.n:
        raise ModelInvariantError(
            f"transversality rank {rank} != ambient dimension {dims.n}"
        )
    min_mult = min(abs(br.c) for br in region.branches)
    ic_lo, ic_hi = region.center_interval
    z_core = region.region.center[s + 1 :]

    # affine words: center chain y -> a y + b, unstable chain z -> C z + d
    word: list[int] = []
    y_lo, y_hi = ic_lo, ic_hi
    a_chain, b_chain = 1.0, 0.0
    C_chain, d_chain = np.eye(dims.u), np.zeros(dims.u)
    widths = [y_hi - y_lo]

    def candidate() -> ChartPoint:
        y_w = 0.5 * (y_lo + y_hi)
        z_w = np.linalg.solve(C_chain, z_core - d_chain)
        return strip.point_at(y_w, z_w)

    for depth in range(max_depth + 1):
        point = candidate()
        dist = _stable_distance(owner, region, point, tuple(word))
        if dist <= tol:
            return IntersectionWitness(
                point=point,
                word=tuple(word),
                depth=depth,
                distance=dist,
                transversality_rank=rank,
                center_widths=tuple(widths),
            )
        if depth == max_depth:
            break
        # choose the branch whose pullback keeps the larger sub-interval
        best = None
        for i, br in enumerate(region.branches):
            # parameters y with (br o chain)(y) still inside I_c
            pre = sorted(((ic_lo - br.by) / br.c, (ic_hi - br.by) / br.c))
            pre_y = sorted(((pre[0] - b_chain) / a_chain, (pre[1] - b_chain) / a_chain))
            new_lo = max(y_lo, pre_y[0])
            new_hi = min(y_hi, pre_y[1])
            slack = new_hi - new_lo
            if best is None or slack > best[0] + 1e-18:
                best = (slack, i, new_lo, new_hi)
        slack, i, new_lo, new_hi = best
        if slack <= 0.0:
            raise ModelInvariantError(
                "no branch keeps a crossing sub-strip (covering violated)"
            )
        br = region.branches[i]
        word.append(i)
        y_lo, y_hi = new_lo, new_hi
        a_chain, b_chain = br.c * a_chain, br.c * b_chain + br.by
        C_chain, d_chain = br.U @ C_chain, br.U @ d_chain + br.bz
        widths.append(y_hi - y_lo)
        if widths[-1] > widths[-2] / min_mult * (1.0 + 1e-9):
            raise ModelInvariantError(
                f"center width failed to contract geometrically at depth "
                f"{depth + 1}: {widths[-2]} -> {widths[-1]}"
            )

    raise ConvergenceError(
        f"no witness within depth {max_depth} (achieved distance {dist:.3e})",
        achieved=float(dist),
    )


def random_well_placed_strip(
    region: BlenderRegion, rng: np.random.Generator, tilt: float | None = None
) -> Strip:
    """Seeded random strip satisfying is_well_placed by construction."""
    dims = region.dims
    s, u = dims.s, dims.u
    alpha_uu, alpha_cu = region.cone_params
    t_cu = alpha_cu if tilt is None else min(tilt, alpha_cu)
    t_uu = alpha_uu if tilt is None else min(tilt, alpha_uu)
    center = region.region.center
    radius = region.region.radius
    base = ChartPoint(
        region.region.chart,
        center[:s] + 0.5 * radius[:s] * rng.uniform(-1.0, 1.0, size=s),
        0.5 * (region.center_interval[0] + region.center_interval[1]),
        center[s + 1 :] + 0.5 * radius[s + 1 :] * rng.uniform(-1.0, 1.0, size=u),
    )
    slope_y = t_cu * rng.uniform(-0.99, 0.99, size=s)
    slope_z = t_cu * rng.uniform(-0.99, 0.99, size=(s, u))
    core_tilt = t_uu * rng.uniform(-0.99, 0.99, size=u)
    # the graph slopes also tilt the core disc; keep both inside the cone
    cap = min(1.0, t_uu / max(t_cu, 1e-300))
    slope_z = slope_z * min(1.0, cap)
    u_radius = region.strip_radius_ratio * region.su_radius * (
        1.0 + rng.uniform(0.0, 1.0)
    )
    return Strip(
        base=base,
        u_radius=u_radius,
        center_extent=region.center_interval,
        slope_y=slope_y,
        slope_z=slope_z,
        core_tilt=core_tilt,
    )


@dataclass(frozen=True)
class RobustnessReport:
    samples: int
    delta_c1: float
    seed: int
    pass_count: int
    worst_margin: float
    base_margin: float
    strips_per_sample: int
    failures: tuple = field(default_factory=tuple)

    @property
    def pass_fraction(self) -> float:
        return self.pass_count / self.samples if self.samples else 1.0


def robustness_test(
    region: BlenderRegion, delta_c1: float, samples: int, seed: int
) -> RobustnessReport:
    """Re-verify the fixed region under seeded C1-small branch perturbations.

    Each sample perturbs every branch coefficient by a relative amount at
    most delta_c1 (volume restored), rebuilds the region over the same box
    and interval, re-runs the covering check and a batch of strip
    intersections.  Failures are reported, never raised.
    """
    base_cert = verify_covering(region)
    if not base_cert.covered:
        raise ModelInvariantError("robustness requires a covered base region")
    if delta_c1 < 0:
        raise ValueError("delta_c1 must be >= 0")
    rng = np.random.default_rng(seed)
    n_strips = 3 if region.owner is not None else 0
    pass_count = 0
    worst = math.inf
    failures = []
    for idx in range(samples):
        try:
            branches = tuple(
                perturb_map_conservative(br, delta_c1, rng) for br in region.branches
            )
            sample_region = replace(region, branches=branches)
            cert = verify_covering(sample_region)
            if not cert.covered:
                raise ModelInvariantError(
                    f"coverage lost (margin {cert.margin:.3e})"
                )
            worst = min(worst, cert.margin)
            for _ in range(n_strips):
                strip = random_well_placed_strip(sample_region, rng)
                strip_intersect_ws(
                    sample_region, strip, region.owner, max_depth=120
                )
            pass_count += 1
        except (ModelInvariantError, ConvergenceError, ValueError) as exc:
            failures.append((idx, str(exc)))
    return RobustnessReport(
        samples=samples,
        delta_c1=float(delta_c1),
        seed=int(seed),
        pass_count=pass_count,
        worst_margin=float(worst if worst < math.inf else base_cert.margin),
        base_margin=float(base_cert.margin),
        strips_per_sample=n_strips,
        failures=tuple(failures),
    )
