"""Block-affine algebra over chart coordinates (x, y, z).

Every map in the package is an affine map whose linear part is block
diagonal with respect to the splitting E^ss + E^c + E^uu: an s x s block S,
a scalar center multiplier c and a u x u block U.  The blocks are stored
separately and are never assembled into a full (s+1+u) x (s+1+u) matrix, so
preservation of the splitting is structural rather than numerical.

All values are immutable after construction and all operations are pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ChartMismatchError,
    DimensionMismatchError,
    SingularBlockError,
)

# Absolute tolerance for "equals" in audits.  Compositions in this package
# are short products of well conditioned blocks.
AUDIT_TOL = 1e-12


def _as_vector(v, dim: int, what: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(v, dtype=float)).reshape(-1)
    if arr.shape != (dim,):
        raise DimensionMismatchError(f"{what}: expected length {dim}, got {arr.shape}")
    arr.setflags(write=False)
    return arr


def _as_matrix(m, dim: int, what: str) -> np.ndarray:
    arr = np.atleast_2d(np.asarray(m, dtype=float))
    if arr.shape != (dim, dim):
        raise DimensionMismatchError(f"{what}: expected {dim}x{dim}, got {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SplittingDims:
    """Dimensions of the partially hyperbolic splitting.

    Both strong bundles must be non-trivial; the center is always
    one-dimensional.
    """

    s: int
    u: int

    def __post_init__(self):
        if self.s < 1 or self.u < 1:
            raise DimensionMismatchError(
                f"both strong bundles must be non-trivial, got s={self.s}, u={self.u}"
            )

    @property
    def n(self) -> int:
        return self.s + 1 + self.u


@dataclass(frozen=True)
class ChartPoint:
    """A point (x, y, z) in a named chart ("P" or "Q")."""

    chart: str
    x: np.ndarray
    y: float
    z: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.atleast_1d(np.asarray(self.x, dtype=float)))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "z", np.atleast_1d(np.asarray(self.z, dtype=float)))
        self.x.setflags(write=False)
        self.z.setflags(write=False)

    @property
    def dims(self) -> SplittingDims:
        return SplittingDims(len(self.x), len(self.z))

    def as_vector(self) -> np.ndarray:
        """Coordinates stacked as (x..., y, z...)."""
        return np.concatenate([self.x, [self.y], self.z])

    def distance(self, other: "ChartPoint") -> float:
        if self.chart != other.chart:
            raise ChartMismatchError(
                f"distance between charts {self.chart!r} and {other.chart!r}"
            )
        return float(np.linalg.norm(self.as_vector() - other.as_vector()))


@dataclass(frozen=True)
class BlockAffineMap:
    """Affine map between charts preserving the E^ss + E^c + E^uu splitting.

    p = (x, y, z) in the domain chart is sent to
    (S x + bx, c y + by, U z + bz) in the codomain chart.
    """

    domain_chart: str
    codomain_chart: str
    S: np.ndarray
    c: float
    U: np.ndarray
    bx: np.ndarray = field(default=None)
    by: float = 0.0
    bz: np.ndarray = field(default=None)

    def __post_init__(self):
        S = np.atleast_2d(np.asarray(self.S, dtype=float))
        U = np.atleast_2d(np.asarray(self.U, dtype=float))
        s, u = S.shape[0], U.shape[0]
        object.__setattr__(self, "S", _as_matrix(S, s, "S"))
        object.__setattr__(self, "U", _as_matrix(U, u, "U"))
        object.__setattr__(self, "c", float(self.c))
        bx = np.zeros(s) if self.bx is None else self.bx
        bz = np.zeros(u) if self.bz is None else self.bz
        object.__setattr__(self, "bx", _as_vector(bx, s, "bx"))
        object.__setattr__(self, "by", float(self.by))
        object.__setattr__(self, "bz", _as_vector(bz, u, "bz"))
        if self.c == 0.0:
            raise SingularBlockError("center multiplier c must be non-zero")
        if np.linalg.det(self.S) == 0.0:
            raise SingularBlockError("singular stable block S")
        if np.linalg.det(self.U) == 0.0:
            raise SingularBlockError("singular unstable block U")

    @property
    def dims(self) -> SplittingDims:
        return SplittingDims(self.S.shape[0], self.U.shape[0])


def identity_map(dims: SplittingDims, chart: str) -> BlockAffineMap:
    return BlockAffineMap(
        domain_chart=chart,
        codomain_chart=chart,
        S=np.eye(dims.s),
        c=1.0,
        U=np.eye(dims.u),
    )


def apply_map(m: BlockAffineMap, p: ChartPoint) -> ChartPoint:
    """Evaluate the map at a point of its domain chart."""
    if p.chart != m.domain_chart:
        raise ChartMismatchError(
            f"point in chart {p.chart!r}, map domain is {m.domain_chart!r}"
        )
    if p.dims != m.dims:
        raise DimensionMismatchError(
            f"point dims {p.dims} do not match map dims {m.dims}"
        )
    return ChartPoint(
        chart=m.codomain_chart,
        x=m.S @ p.x + m.bx,
        y=m.c * p.y + m.by,
        z=m.U @ p.z + m.bz,
    )


def compose(outer: BlockAffineMap, inner: BlockAffineMap) -> BlockAffineMap:
    """The map `outer after inner`.

    The center multiplier of the result is the literal float product of the
    component multipliers, which downstream modules rely on being exact for
    dyadic models.
    """
    if inner.codomain_chart != outer.domain_chart:
        raise ChartMismatchError(
            f"cannot chain {inner.codomain_chart!r} -> {outer.domain_chart!r}"
        )
    if inner.dims != outer.dims:
        raise DimensionMismatchError("block dimensions differ between factors")
    return BlockAffineMap(
        domain_chart=inner.domain_chart,
        codomain_chart=outer.codomain_chart,
        S=outer.S @ inner.S,
        c=outer.c * inner.c,
        U=outer.U @ inner.U,
        bx=outer.S @ inner.bx + outer.bx,
        by=outer.c * inner.by + outer.by,
        bz=outer.U @ inner.bz + outer.bz,
    )


def compose_chain(maps) -> BlockAffineMap:
    """Compose a sequence of maps applied left to right (first map first)."""
    maps = list(maps)
    if not maps:
        raise ValueError("empty composition chain")
    result = maps[0]
    for m in maps[1:]:
        result = compose(m, result)
    return result


def invert(m: BlockAffineMap) -> BlockAffineMap:
    Sinv = np.linalg.inv(m.S)
    Uinv = np.linalg.inv(m.U)
    return BlockAffineMap(
        domain_chart=m.codomain_chart,
        codomain_chart=m.domain_chart,
        S=Sinv,
        c=1.0 / m.c,
        U=Uinv,
        bx=-Sinv @ m.bx,
        by=-m.by / m.c,
        bz=-Uinv @ m.bz,
    )


def iterate(m: BlockAffineMap, k: int) -> BlockAffineMap:
    """k-fold composition of a chart-preserving map with itself, k >= 1."""
    if m.domain_chart != m.codomain_chart:
        raise ChartMismatchError("can only iterate chart-preserving maps")
    if k < 1:
        raise ValueError("k must be >= 1")
    result = m
    for _ in range(k - 1):
        result = compose(m, result)
    return result


def volume_defect(m: BlockAffineMap) -> float:
    """| |det S * c * det U| - 1 |; zero iff the map preserves volume."""
    return abs(abs(np.linalg.det(m.S) * m.c * np.linalg.det(m.U)) - 1.0)


def maps_close(a: BlockAffineMap, b: BlockAffineMap, tol: float = AUDIT_TOL) -> bool:
    """Entrywise comparison of two maps with matching chart labels."""
    if (a.domain_chart, a.codomain_chart) != (b.domain_chart, b.codomain_chart):
        return False
    return (
        np.allclose(a.S, b.S, rtol=0.0, atol=tol)
        and abs(a.c - b.c) <= tol
        and np.allclose(a.U, b.U, rtol=0.0, atol=tol)
        and np.allclose(a.bx, b.bx, rtol=0.0, atol=tol)
        and abs(a.by - b.by) <= tol
        and np.allclose(a.bz, b.bz, rtol=0.0, atol=tol)
    )


@dataclass(frozen=True)
class Box:
    """Axis-aligned box of per-coordinate closed intervals in one chart."""

    chart: str
    lo: np.ndarray
    hi: np.ndarray
    name: str = ""

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape:
            raise DimensionMismatchError("box lo/hi shapes differ")
        if np.any(lo > hi):
            raise ValueError(f"empty box {self.name!r}")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def from_center_radius(cls, chart, center, radius, name="") -> "Box":
        center = np.atleast_1d(np.asarray(center, dtype=float))
        radius = np.broadcast_to(np.asarray(radius, dtype=float), center.shape)
        return cls(chart, center - radius, center + radius, name)

    @property
    def center(self) -> np.ndarray:
        return (self.lo + self.hi) / 2.0

    @property
    def radius(self) -> np.ndarray:
        return (self.hi - self.lo) / 2.0

    def contains_point(self, p: ChartPoint, tol: float = 0.0) -> bool:
        if p.chart != self.chart:
            return False
        v = p.as_vector()
        return bool(np.all(v >= self.lo - tol) and np.all(v <= self.hi + tol))

    def contains_box(self, other: "Box", tol: float = 0.0) -> bool:
        if other.chart != self.chart:
            return False
        return bool(
            np.all(other.lo >= self.lo - tol) and np.all(other.hi <= self.hi + tol)
        )


def map_box(m: BlockAffineMap, box: Box, name: str = "") -> Box:
    """Exact interval image of a box under a block-affine map.

    Row-wise interval arithmetic: the image of a product of intervals under
    an affine map is again a box in each coordinate's interval hull.
    """
    if box.chart != m.domain_chart:
        raise ChartMismatchError(
            f"box in chart {box.chart!r}, map domain is {m.domain_chart!r}"
        )
    s, u = m.dims.s, m.dims.u
    lo = np.empty(s + 1 + u)
    hi = np.empty(s + 1 + u)

    def row_image(row, lo_in, hi_in, offset):
        pos = np.clip(row, 0.0, None)
        neg = np.clip(row, None, 0.0)
        return (pos @ lo_in + neg @ hi_in + offset, pos @ hi_in + neg @ lo_in + offset)

    for i in range(s):
        lo[i], hi[i] = row_image(m.S[i], box.lo[:s], box.hi[:s], m.bx[i])
    yl = m.c * box.lo[s] + m.by
    yh = m.c * box.hi[s] + m.by
    lo[s], hi[s] = min(yl, yh), max(yl, yh)
    for j in range(u):
        lo[s + 1 + j], hi[s + 1 + j] = row_image(
            m.U[j], box.lo[s + 1 :], box.hi[s + 1 :], m.bz[j]
        )
    return Box(m.codomain_chart, lo, hi, name or box.name)
