"""The unfolding family f_t and conservative retuning of center multipliers.

The unfolding shifts the incoming transition by (0, t, 0) in the P chart,
breaking the quasi-transverse heteroclinic intersection while leaving the
derivatives at p and q untouched.  Retuning replaces the center multipliers
(lambda, mu) by nearby (lambda0, mu0), spreading the volume compensation
uniformly over the unstable block so the s-block spectrum and its gap are
untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core_affine import (
    AUDIT_TOL,
    BlockAffineMap,
    Box,
    map_box,
    volume_defect,
)
from .cycle_model import SimpleCycle, validate
from .errors import ModelInvariantError


def shifted_t_in(base: SimpleCycle, t: float) -> BlockAffineMap:
    m = base.T_in
    return BlockAffineMap(
        m.domain_chart, m.codomain_chart, m.S, m.c, m.U, m.bx, m.by + t, m.bz
    )


@dataclass(frozen=True)
class UnfoldedCycle:
    """A simple cycle unfolded by parameter t.

    Exposes the same map/box interface as :class:`SimpleCycle`; only T_in
    differs (post-composed with the translation (0, t, 0)_P).
    """

    base: SimpleCycle
    t: float = 0.0

    @property
    def dims(self):
        return self.base.dims

    @property
    def A(self):
        return self.base.A

    @property
    def B(self):
        return self.base.B

    @property
    def T_out(self):
        return self.base.T_out

    @property
    def T_in(self):
        return shifted_t_in(self.base, self.t)

    @property
    def U_P(self):
        return self.base.U_P

    @property
    def U_Q(self):
        return self.base.U_Q

    @property
    def V(self):
        return self.base.V

    @property
    def W(self):
        return self.base.W

    @property
    def mu(self):
        return self.base.mu

    @property
    def lam(self):
        return self.base.lam

    @property
    def y_plus(self):
        return self.base.y_plus

    @property
    def y_minus(self):
        return self.base.y_minus

    @property
    def delta_y(self):
        return self.base.delta_y

    @property
    def steps(self):
        return self.base.steps

    def map_for(self, symbol: str) -> BlockAffineMap:
        if symbol == "T_in":
            return self.T_in
        return self.base.map_for(symbol)

    def domain_box_for(self, symbol: str) -> Box:
        return self.base.domain_box_for(symbol)


def shift_family(cycle: SimpleCycle, t: float) -> UnfoldedCycle:
    """Unfold the cycle: T_in gains a center translation by t.

    For t != 0 the image of W^u_loc(q) misses the ss-plane through the
    origin by exactly t in the center coordinate.  Errors if the shifted
    image of V leaves U_P.
    """
    unfolded = UnfoldedCycle(cycle, float(t))
    image = map_box(unfolded.T_in, cycle.V)
    if not cycle.U_P.contains_box(image, tol=AUDIT_TOL):
        raise ModelInvariantError(
            f"shift t={t} pushes T_in(V) outside U_P"
        )
    return unfolded


def retune_center(cycle: SimpleCycle, lam0: float, mu0: float) -> SimpleCycle:
    """Replace the center multipliers, keeping every map volume preserving.

    The dominating strong block is rescaled by the same factor as the
    center, so the tight spectral ratios (mu0 <= min|eig A.U| at p,
    max|eig B.S| <= lam0 at q) survive exactly; the opposite strong block
    absorbs the volume compensation, where the ordering has slack.  Errors
    if the compensation nevertheless breaks an invariant.
    """
    if not (0.0 < lam0 < 1.0):
        raise ModelInvariantError(f"lambda0 must be in (0,1), got {lam0}")
    if not mu0 > 1.0:
        raise ModelInvariantError(f"mu0 must be > 1, got {mu0}")
    if lam0 == cycle.lam and mu0 == cycle.mu:
        return cycle

    s, u = cycle.dims.s, cycle.dims.u
    A = cycle.A
    B = cycle.B
    mu_ratio = mu0 / cycle.mu
    lam_ratio = lam0 / cycle.lam
    A2 = BlockAffineMap(
        A.domain_chart,
        A.codomain_chart,
        (1.0 / mu_ratio) ** ((1.0 + u) / s) * A.S,
        mu0,
        mu_ratio * A.U,
        A.bx,
        A.by,
        A.bz,
    )
    B2 = BlockAffineMap(
        B.domain_chart,
        B.codomain_chart,
        lam_ratio * B.S,
        lam0,
        (1.0 / lam_ratio) ** ((1.0 + s) / u) * B.U,
        B.bx,
        B.by,
        B.bz,
    )
    retuned = replace(cycle, A=A2, B=B2)
    report = validate(retuned)
    if not report.passed:
        raise ModelInvariantError(
            "retune breaks model invariants:\n"
            + "\n".join(str(c) for c in report.failures())
        )
    return retuned


def perturb_map_conservative(
    m: BlockAffineMap, rel_size: float, rng: np.random.Generator
) -> BlockAffineMap:
    """Random relative perturbation of every coefficient, volume restored.

    Each entry of S, c, U and the translation is scaled/offset by at most
    ``rel_size`` relatively; the unstable block is then rescaled by a
    uniform factor so the determinant product returns to modulus one.
    """
    if rel_size < 0:
        raise ValueError("rel_size must be >= 0")

    def jitter(arr):
        return arr * (1.0 + rel_size * rng.uniform(-1.0, 1.0, size=np.shape(arr)))

    S = jitter(m.S)
    c = float(jitter(np.array(m.c)))
    U = jitter(m.U)
    bx = jitter(m.bx)
    by = float(jitter(np.array(m.by)))
    bz = jitter(m.bz)

    u = U.shape[0]
    det = abs(np.linalg.det(S) * c * np.linalg.det(U))
    U = U * (1.0 / det) ** (1.0 / u)
    out = BlockAffineMap(m.domain_chart, m.codomain_chart, S, c, U, bx, by, bz)
    defect = volume_defect(out)
    if defect > AUDIT_TOL:
        raise ModelInvariantError(f"volume compensation failed, defect {defect}")
    return out
