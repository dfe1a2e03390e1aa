"""Periodic points of the unfolded cycle and their homoclinic geometry.

A single pass through the cycle with m iterates near q and n near p is the
affine return map G = A^n o T_in,t o B^m o T_out on the P chart.  When the
center coordinate y+ is G-fixed, G has a genuine fixed point in the
su-plane through (0, y+, 0)_P; the s block contracts and the u block
expands, so the fixed point is obtained blockwise and the su-disc is mapped
Markovianly across itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .center_dynamics import RESIDUAL_TOL, psi
from .core_affine import (
    AUDIT_TOL,
    BlockAffineMap,
    Box,
    ChartPoint,
    apply_map,
    compose_chain,
    invert,
    map_box,
)
from .cycle_model import cycle_itinerary, orbit
from .errors import ConvergenceError, ModelInvariantError
from .perturbation import UnfoldedCycle


@dataclass(frozen=True)
class ReturnMap:
    """G = A^n o T_in,t o B^m o T_out with its word data."""

    G: BlockAffineMap
    m: int
    n: int
    t: float
    period: int

    @property
    def center_multiplier(self) -> float:
        return self.G.c


def build_return_map(model: UnfoldedCycle, m: int, n: int) -> ReturnMap:
    if m < 1 or n < 1:
        raise ValueError("m and n must be >= 1")
    chain = [model.T_out] + [model.B] * m + [model.T_in] + [model.A] * n
    G = compose_chain(chain)
    expected = model.mu**n * model.lam**m
    if not np.isclose(G.c, expected, rtol=1e-12, atol=0.0):
        raise ModelInvariantError(
            f"composed center multiplier {G.c} != mu^n lam^m = {expected}"
        )
    steps = model.steps
    return ReturnMap(G=G, m=m, n=n, t=model.t, period=n + steps.l + m + steps.r)


def _unit_su_disc(dims, y: float) -> Box:
    lo = np.concatenate([-np.ones(dims.s), [y], -np.ones(dims.u)])
    hi = np.concatenate([np.ones(dims.s), [y], np.ones(dims.u)])
    return Box("P", lo, hi, "su-disc")


@dataclass(frozen=True)
class PeriodicOrbitRecord:
    point: ChartPoint
    return_map: ReturnMap
    monodromy_spectrum: tuple
    cylinder_u: Box
    cylinder_s: Box
    cylinder_delta: float

    @property
    def center_eigenvalue(self) -> float:
        return self.return_map.center_multiplier

    @property
    def center_expanding(self) -> bool:
        return abs(self.center_eigenvalue) > 1.0

    def uu_slice_extent(self) -> float:
        # the normalized strong-unstable disc {x_p} x {y+} x [-1,1]^u
        return 1.0

    def distance_to_uu_slice(self, p: ChartPoint) -> float:
        over = np.maximum(np.abs(p.z) - 1.0, 0.0)
        return float(
            np.linalg.norm(
                np.concatenate([p.x - self.point.x, [p.y - self.point.y], over])
            )
        )

    def distance_to_ss_slice(self, p: ChartPoint) -> float:
        over = np.maximum(np.abs(p.x) - 1.0, 0.0)
        return float(
            np.linalg.norm(
                np.concatenate([over, [p.y - self.point.y], p.z - self.point.z])
            )
        )


def find_periodic(model: UnfoldedCycle, m: int, n: int) -> PeriodicOrbitRecord:
    """Construct p_{m,n} = (x_{m,n}, y+, z_{m,n})_P for an admissible pass.

    Requires |psi(y+) - y+| <= 1e-10.  The fixed point is solved blockwise
    (contracting s part forward, expanding u part backward); the full
    generating orbit must stay inside the chart and transition boxes,
    mirroring the "sufficiently large m, n" hypothesis.
    """
    yp = model.y_plus
    residual = abs(psi(model, m, n, yp) - yp)
    if residual > RESIDUAL_TOL:
        raise ModelInvariantError(
            f"psi^({m},{n}) does not fix y+ (residual {residual:.3e})"
        )
    rm = build_return_map(model, m, n)
    G = rm.G
    s, u = G.dims.s, G.dims.u

    x_star = np.linalg.solve(np.eye(s) - G.S, G.bx)
    z_star = np.linalg.solve(np.eye(u) - G.U, G.bz)
    point = ChartPoint("P", x_star, yp, z_star)

    image = apply_map(G, point)
    fp_residual = image.distance(point)
    if fp_residual > RESIDUAL_TOL:
        raise ModelInvariantError(
            f"blockwise fixed point fails to close up (residual {fp_residual:.3e})"
        )

    # hyperbolicity of the su-plane dynamics
    s_radius = float(np.max(np.abs(np.linalg.eigvals(G.S))))
    u_sigma = float(np.min(np.linalg.svd(G.U, compute_uv=False)))
    if not (s_radius < 1.0 < u_sigma):
        raise ModelInvariantError(
            f"return map not blockwise hyperbolic: rho(S)={s_radius}, "
            f"sigma_min(U)={u_sigma}"
        )

    # non-escape of the full generating orbit (raises DomainEscapeError)
    orbit(model, point, cycle_itinerary(m, n), check_domains=True)

    # Markov cylinders inside the normalized su-disc
    disc = _unit_su_disc(G.dims, yp)
    image_box = map_box(G, disc)
    preimage_box = map_box(invert(G), disc)

    x_center = image_box.center[:s]
    margin_u_x = float(np.min(image_box.radius[:s]))
    margin_u_z = float(
        min(np.min(image_box.hi[s + 1 :] - 1.0), np.min(-1.0 - image_box.lo[s + 1 :]))
    )
    z_center = preimage_box.center[s + 1 :]
    margin_s_z = float(np.min(preimage_box.radius[s + 1 :]))
    margin_s_x = float(
        min(
            np.min(preimage_box.hi[:s] - 1.0),
            np.min(-1.0 - preimage_box.lo[:s]),
        )
    )
    if min(margin_u_z, margin_s_x) <= 0.0:
        raise ModelInvariantError(
            "su-disc is not mapped Markovianly across itself"
        )
    if np.any(np.abs(z_center) >= 1.0):
        raise ModelInvariantError("C^s core leaves the open su-disc")
    delta = 0.5 * min(margin_u_x, margin_s_z)
    cyl_u = Box(
        "P",
        np.concatenate([x_center - delta, [yp], -np.ones(u)]),
        np.concatenate([x_center + delta, [yp], np.ones(u)]),
        "C^u",
    )
    cyl_s = Box(
        "P",
        np.concatenate([-np.ones(s), [yp], z_center - delta]),
        np.concatenate([np.ones(s), [yp], z_center + delta]),
        "C^s",
    )
    if not image_box.contains_box(cyl_u, tol=AUDIT_TOL):
        raise ModelInvariantError("image cylinder C^u not inside G(su-disc)")
    if not preimage_box.contains_box(cyl_s, tol=AUDIT_TOL):
        raise ModelInvariantError("core cylinder C^s not inside G^-1(su-disc)")
    if not (cyl_u.contains_point(point, tol=AUDIT_TOL) and cyl_s.contains_point(point, tol=AUDIT_TOL)):
        raise ModelInvariantError("periodic point escapes its cylinders")

    spectrum = tuple(
        sorted(
            np.concatenate(
                [
                    np.abs(np.linalg.eigvals(G.S)),
                    [abs(G.c)],
                    np.abs(np.linalg.eigvals(G.U)),
                ]
            ).tolist()
        )
    )
    return PeriodicOrbitRecord(
        point=point,
        return_map=rm,
        monodromy_spectrum=spectrum,
        cylinder_u=cyl_u,
        cylinder_s=cyl_s,
        cylinder_delta=delta,
    )


def homoclinic_relation(
    a: PeriodicOrbitRecord, b: PeriodicOrbitRecord
) -> tuple[ChartPoint, ChartPoint]:
    """Cross intersections of the strong discs inside the plane {y = y+}.

    Returns (W^uu(a) cap W^ss(b), W^uu(b) cap W^ss(a)); exact in the
    linear model since the discs are coordinate planes.
    """
    if abs(a.point.y - b.point.y) > RESIDUAL_TOL:
        raise ModelInvariantError("records do not share the center coordinate")
    if a.point.distance(b.point) < 1e-10:
        raise ModelInvariantError("records coincide; need two distinct points")
    needed = max(
        float(np.max(np.abs(a.point.x))),
        float(np.max(np.abs(b.point.x))),
        float(np.max(np.abs(a.point.z))),
        float(np.max(np.abs(b.point.z))),
    )
    if needed > 1.0:
        raise ModelInvariantError(
            f"disc extents too small: need radius >= {needed} to intersect"
        )
    p_ab = ChartPoint("P", a.point.x, a.point.y, b.point.z)
    p_ba = ChartPoint("P", b.point.x, b.point.y, a.point.z)
    return p_ab, p_ba


@dataclass(frozen=True)
class StrongHomoclinicCertificate:
    owner: PeriodicOrbitRecord
    partner: PeriodicOrbitRecord
    cross_intersections: tuple
    shadow_point: ChartPoint
    shadow_residuals: tuple
    steps_used: int
    quasi_transverse_rank: int

    @property
    def max_residual(self) -> float:
        return max(self.shadow_residuals)


def strong_homoclinic_certificate(
    model: UnfoldedCycle,
    a: PeriodicOrbitRecord,
    b: PeriodicOrbitRecord,
    tol: float,
    max_steps: int,
) -> StrongHomoclinicCertificate:
    """Finite-orbit surrogate for the inclination-lemma argument.

    Shoots a point of W^uu_loc(a) whose forward orbit under the partner's
    return map lands on W^ss(a): the shadow's strong-unstable coordinate
    is the j-step backward image (under b's expanding block) of a's
    strong-stable coordinate.  The certificate is numerical evidence at
    tolerance ``tol``, not a proof; exact coincidence is a limit object,
    so tol = 0 cannot converge.
    """
    cross = homoclinic_relation(a, b)
    Gb = b.return_map.G
    Uinv = np.linalg.inv(Gb.U)
    dims = Gb.dims
    n_amb = dims.n
    rank = int(
        np.linalg.matrix_rank(
            np.vstack(
                [
                    np.hstack([np.eye(dims.s), np.zeros((dims.s, 1 + dims.u))]),
                    np.hstack([np.zeros((dims.u, dims.s + 1)), np.eye(dims.u)]),
                ]
            )
        )
    )

    achieved = np.inf
    z_back = a.point.z.copy()
    for j in range(1, max_steps + 1):
        z_back = Uinv @ (z_back - Gb.bz)
        shadow = ChartPoint("P", a.point.x, a.point.y, z_back)
        if np.any(np.abs(shadow.z) > 1.0):
            continue
        # forward shooting: j steps along the partner's return map must land
        # the orbit on W^ss(a); rounding noise amplified by U_b^j can
        # overflow for hopeless j, which just reads as a huge residual
        with np.errstate(over="ignore", invalid="ignore"):
            p = shadow
            for _ in range(j):
                p = apply_map(Gb, p)
            r_uu = a.distance_to_uu_slice(shadow)
            r_ss = a.distance_to_ss_slice(p)
        achieved = min(achieved, max(r_uu, r_ss))
        separation = shadow.distance(a.point)
        if r_uu <= tol and r_ss <= tol and separation >= 100.0 * tol:
            if rank != n_amb - 1:
                raise ModelInvariantError(
                    f"tangent sum rank {rank} != n-1 = {n_amb - 1}"
                )
            return StrongHomoclinicCertificate(
                owner=a,
                partner=b,
                cross_intersections=cross,
                shadow_point=shadow,
                shadow_residuals=(r_uu, r_ss),
                steps_used=j,
                quasi_transverse_rank=rank,
            )
    raise ConvergenceError(
        f"no strong homoclinic witness within {max_steps} steps "
        f"(best residual {achieved:.3e})",
        achieved=float(achieved),
    )
