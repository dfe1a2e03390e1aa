"""The simple-cycle normal form: assembly, validation, orbits, manifolds.

The model consists of two affine local maps A (P chart, expanding center)
and B (Q chart, contracting center), an outgoing transition T_out carrying
a neighborhood W of (0, y+, 0)_P to the Q chart, and an incoming transition
T_in carrying a neighborhood V of (0, 0, z0)_Q back to the P chart.  Both
transitions act as isometries on the center coordinate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .core_affine import (
    AUDIT_TOL,
    BlockAffineMap,
    Box,
    ChartPoint,
    SplittingDims,
    apply_map,
    map_box,
    volume_defect,
)
from .errors import ChartMismatchError, DomainEscapeError, ModelInvariantError

SYMBOLS = ("A", "B", "T_out", "T_in")

# symbol -> (domain chart, codomain chart)
SYMBOL_CHARTS = {
    "A": ("P", "P"),
    "B": ("Q", "Q"),
    "T_out": ("P", "Q"),
    "T_in": ("Q", "P"),
}


@dataclass(frozen=True)
class StepCounts:
    """Abstract iterate counts absorbed into the two transitions.

    They enter period bookkeeping only; the affine data of the transitions
    already includes them.
    """

    l: int = 1
    r: int = 1


@dataclass(frozen=True)
class SimpleCycle:
    dims: SplittingDims
    A: BlockAffineMap
    B: BlockAffineMap
    T_out: BlockAffineMap
    T_in: BlockAffineMap
    y_plus: float
    y_minus: float
    z0: np.ndarray
    x0: np.ndarray
    U_P: Box
    U_Q: Box
    V: Box
    W: Box
    steps: StepCounts = field(default_factory=StepCounts)
    segment_eps: float = 0.1

    def __post_init__(self):
        z0 = np.atleast_1d(np.asarray(self.z0, dtype=float))
        x0 = np.atleast_1d(np.asarray(self.x0, dtype=float))
        z0.setflags(write=False)
        x0.setflags(write=False)
        object.__setattr__(self, "z0", z0)
        object.__setattr__(self, "x0", x0)

    @property
    def mu(self) -> float:
        return self.A.c

    @property
    def lam(self) -> float:
        return self.B.c

    @property
    def delta_y(self) -> float:
        return self.y_minus - self.y_plus

    @property
    def t(self) -> float:
        # the unperturbed model; UnfoldedCycle overrides
        return 0.0

    def map_for(self, symbol: str) -> BlockAffineMap:
        try:
            return {
                "A": self.A,
                "B": self.B,
                "T_out": self.T_out,
                "T_in": self.T_in,
            }[symbol]
        except KeyError:
            raise ValueError(f"unknown itinerary symbol {symbol!r}") from None

    def domain_box_for(self, symbol: str) -> Box:
        return {"A": self.U_P, "B": self.U_Q, "T_out": self.W, "T_in": self.V}[symbol]

    def heteroclinic_in(self) -> ChartPoint:
        """(0, 0, z0)_Q, the quasi-transverse point of W^s(p) and W^u(q)."""
        return ChartPoint("Q", np.zeros(self.dims.s), 0.0, self.z0)

    def heteroclinic_out(self) -> ChartPoint:
        """(0, y+, 0)_P, the transverse point of W^u(p) and W^s(q)."""
        return ChartPoint("P", np.zeros(self.dims.s), self.y_plus, np.zeros(self.dims.u))


@dataclass(frozen=True)
class Itinerary:
    """A finite word over the symbols A, B, T_out, T_in."""

    word: tuple

    def __post_init__(self):
        object.__setattr__(self, "word", tuple(self.word))
        for sym in self.word:
            if sym not in SYMBOLS:
                raise ValueError(f"unknown itinerary symbol {sym!r}")

    def __len__(self):
        return len(self.word)

    def __iter__(self):
        return iter(self.word)

    @property
    def start_chart(self) -> str:
        return SYMBOL_CHARTS[self.word[0]][0]

    def check_chart_consistency(self) -> None:
        chart = self.start_chart
        for i, sym in enumerate(self.word):
            dom, cod = SYMBOL_CHARTS[sym]
            if dom != chart:
                raise ChartMismatchError(
                    f"itinerary symbol {sym!r} at position {i} expects chart "
                    f"{dom!r} but orbit is in {chart!r}"
                )
            chart = cod


def cycle_itinerary(m: int, n: int) -> Itinerary:
    """One pass through the cycle: T_out, B^m, T_in, A^n (applied in order)."""
    return Itinerary(("T_out",) + ("B",) * m + ("T_in",) + ("A",) * n)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    measured: object = None

    def __str__(self):
        status = "pass" if self.passed else "FAIL"
        return f"[{status}] {self.name}: {self.measured}"


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def __str__(self):
        return "\n".join(str(c) for c in self.checks)


def _moduli(matrix: np.ndarray) -> np.ndarray:
    return np.sort(np.abs(np.linalg.eigvals(matrix)))


def validate(cycle: SimpleCycle) -> ValidationReport:
    """Check every defining condition of the normal form.

    Failures are report entries, never exceptions.
    """
    checks = []
    s, u = cycle.dims.s, cycle.dims.u

    sA = _moduli(cycle.A.S)
    uA = _moduli(cycle.A.U)
    mu = cycle.mu
    checks.append(
        Check(
            "spectral ordering at p: |eig A.S| < 1 < mu <= min |eig A.U|",
            bool(sA[-1] < 1.0 < mu <= uA[0]),
            {"max|eig A.S|": float(sA[-1]), "mu": mu, "min|eig A.U|": float(uA[0])},
        )
    )

    sB = _moduli(cycle.B.S)
    uB = _moduli(cycle.B.U)
    lam = cycle.lam
    checks.append(
        Check(
            "spectral ordering at q: |eig B.S| <= lambda < 1 < |eig B.U|",
            bool(sB[-1] <= lam < 1.0 < uB[0]),
            {"max|eig B.S|": float(sB[-1]), "lambda": lam, "min|eig B.U|": float(uB[0])},
        )
    )

    index_p = int(np.sum(np.abs(np.linalg.eigvals(cycle.A.U)) > 1.0)) + (1 if abs(mu) > 1 else 0)
    index_q = int(np.sum(np.abs(np.linalg.eigvals(cycle.B.U)) > 1.0)) + (1 if abs(lam) > 1 else 0)
    checks.append(
        Check(
            "index bookkeeping: index(p) = u+1, index(q) = u",
            index_p == u + 1 and index_q == u,
            {"index(p)": index_p, "index(q)": index_q, "u": u},
        )
    )

    out_img = apply_map(cycle.T_out, cycle.heteroclinic_out())
    expected_out = ChartPoint("Q", np.zeros(s), cycle.y_minus, np.zeros(u))
    d_out = out_img.distance(expected_out)
    checks.append(
        Check(
            "T_out(0, y+, 0)_P = (0, y-, 0)_Q",
            d_out <= AUDIT_TOL,
            {"distance": d_out},
        )
    )
    checks.append(
        Check(
            "T_out is a center isometry",
            abs(abs(cycle.T_out.c) - 1.0) <= AUDIT_TOL,
            {"|c|": abs(cycle.T_out.c)},
        )
    )

    in_img = apply_map(cycle.T_in, cycle.heteroclinic_in())
    expected_in = ChartPoint("P", cycle.x0, 0.0, np.zeros(u))
    d_in = in_img.distance(expected_in)
    checks.append(
        Check(
            "T_in(0, 0, z0)_Q = (x0, 0, 0)_P",
            d_in <= AUDIT_TOL,
            {"distance": d_in},
        )
    )
    checks.append(
        Check(
            "T_in is a center isometry",
            abs(abs(cycle.T_in.c) - 1.0) <= AUDIT_TOL,
            {"|c|": abs(cycle.T_in.c)},
        )
    )

    defects = {
        name: volume_defect(cycle.map_for(name)) for name in SYMBOLS
    }
    checks.append(
        Check(
            "volume defect <= 1e-12 for A, B, T_out, T_in",
            all(d <= AUDIT_TOL for d in defects.values()),
            defects,
        )
    )

    checks.append(
        Check("V inside U_Q", cycle.U_Q.contains_box(cycle.V), None)
    )
    checks.append(
        Check("W inside U_P", cycle.U_P.contains_box(cycle.W), None)
    )
    checks.append(
        Check(
            "T_in(V) inside U_P",
            cycle.U_P.contains_box(map_box(cycle.T_in, cycle.V)),
            None,
        )
    )
    checks.append(
        Check(
            "T_out(W) inside U_Q",
            cycle.U_Q.contains_box(map_box(cycle.T_out, cycle.W)),
            None,
        )
    )

    checks.append(
        Check(
            "sign conventions: y+ > 0 > y-",
            cycle.y_plus > 0.0 > cycle.y_minus,
            {"y+": cycle.y_plus, "y-": cycle.y_minus},
        )
    )

    # the item-4 segment I = [y+-eps, y++eps] must sit inside W and map
    # exactly onto J = [y--eps, y-+eps] (center multiplier 1)
    eps = cycle.segment_eps
    seg_lo = apply_map(
        cycle.T_out, ChartPoint("P", np.zeros(s), cycle.y_plus - eps, np.zeros(u))
    )
    seg_hi = apply_map(
        cycle.T_out, ChartPoint("P", np.zeros(s), cycle.y_plus + eps, np.zeros(u))
    )
    j_ends = sorted([seg_lo.y, seg_hi.y])
    seg_ok = (
        abs(j_ends[0] - (cycle.y_minus - eps)) <= AUDIT_TOL
        and abs(j_ends[1] - (cycle.y_minus + eps)) <= AUDIT_TOL
        and cycle.W.lo[s] <= cycle.y_plus - eps
        and cycle.W.hi[s] >= cycle.y_plus + eps
    )
    checks.append(
        Check(
            "center segment I maps exactly onto J",
            bool(seg_ok),
            {"J": j_ends, "expected": [cycle.y_minus - eps, cycle.y_minus + eps]},
        )
    )

    return ValidationReport(tuple(checks))


def orbit(
    model,
    start: ChartPoint,
    itin: Itinerary | Sequence[str],
    check_domains: bool = True,
) -> list[ChartPoint]:
    """Trace the orbit of `start` through an itinerary.

    With ``check_domains`` each local symbol requires the current point to
    lie in its chart box and each transition requires it to lie in V or W;
    violation raises :class:`DomainEscapeError` naming the step and box.
    Schematic itineraries that only track the center coordinate can disable
    the box checks; chart consistency is always enforced.
    """
    if not isinstance(itin, Itinerary):
        itin = Itinerary(tuple(itin))
    itin.check_chart_consistency()
    if start.chart != itin.start_chart:
        raise ChartMismatchError(
            f"start point in chart {start.chart!r}, itinerary begins in "
            f"{itin.start_chart!r}"
        )
    trace = [start]
    current = start
    for i, sym in enumerate(itin):
        if check_domains:
            box = model.domain_box_for(sym)
            if not box.contains_point(current, tol=AUDIT_TOL):
                raise DomainEscapeError(i, box.name or sym)
        current = apply_map(model.map_for(sym), current)
        trace.append(current)
    return trace


@dataclass(frozen=True)
class ManifoldSlice:
    """An exact affine invariant-manifold slice in one chart.

    ``spans`` is a subset of {"ss", "c", "uu"}; the slice is the affine
    subspace through ``base`` spanned by those coordinate blocks, clipped to
    ``extent``.
    """

    base: ChartPoint
    spans: frozenset
    extent: Box

    @property
    def dimension(self) -> int:
        d = 0
        if "ss" in self.spans:
            d += len(self.base.x)
        if "c" in self.spans:
            d += 1
        if "uu" in self.spans:
            d += len(self.base.z)
        return d

    def spanning_vectors(self) -> np.ndarray:
        """Rows are tangent vectors in (x, y, z) stacked coordinates."""
        s, u = len(self.base.x), len(self.base.z)
        n = s + 1 + u
        rows = []
        if "ss" in self.spans:
            for i in range(s):
                e = np.zeros(n)
                e[i] = 1.0
                rows.append(e)
        if "c" in self.spans:
            e = np.zeros(n)
            e[s] = 1.0
            rows.append(e)
        if "uu" in self.spans:
            for j in range(u):
                e = np.zeros(n)
                e[s + 1 + j] = 1.0
                rows.append(e)
        return np.array(rows)

    def distance_to(self, p: ChartPoint) -> float:
        """Distance from a point to the slice, ignoring the extent clip in
        spanned directions but including escape beyond the extent."""
        if p.chart != self.base.chart:
            raise ChartMismatchError("point and slice live in different charts")
        v = p.as_vector()
        b = self.base.as_vector()
        s, u = len(self.base.x), len(self.base.z)
        spanned = np.zeros(s + 1 + u, dtype=bool)
        if "ss" in self.spans:
            spanned[:s] = True
        if "c" in self.spans:
            spanned[s] = True
        if "uu" in self.spans:
            spanned[s + 1 :] = True
        # in non-spanned directions: offset from the base point; in spanned
        # directions: overflow beyond the extent box
        diff = np.where(spanned, 0.0, v - b)
        over = np.maximum(v - self.extent.hi, 0.0) + np.maximum(self.extent.lo - v, 0.0)
        diff = diff + np.where(spanned, over, 0.0)
        return float(np.linalg.norm(diff))


_SLICE_SPANS = {
    "W^ss_p": frozenset({"ss"}),
    "W^uu_p": frozenset({"uu"}),
    "W^c_p": frozenset({"c"}),
    "W^s_p": frozenset({"ss"}),          # expanding center at p: stable = strong stable
    "W^u_p": frozenset({"c", "uu"}),     # index u+1
    "W^ss_q": frozenset({"ss"}),
    "W^uu_q": frozenset({"uu"}),
    "W^c_q": frozenset({"c"}),
    "W^s_q": frozenset({"ss", "c"}),     # contracting center at q
    "W^u_q": frozenset({"uu"}),          # index u
}


def manifold_slice(cycle: SimpleCycle, which: str) -> ManifoldSlice:
    """Local invariant-manifold slice at p or q in the linear model."""
    if which not in _SLICE_SPANS:
        raise ValueError(f"unknown manifold label {which!r}")
    chart = "P" if which.endswith("_p") else "Q"
    dims = cycle.dims
    base = ChartPoint(chart, np.zeros(dims.s), 0.0, np.zeros(dims.u))
    extent = cycle.U_P if chart == "P" else cycle.U_Q
    return ManifoldSlice(base=base, spans=_SLICE_SPANS[which], extent=extent)


@dataclass(frozen=True)
class CheckResult:
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __str__(self):
        return "\n".join(str(c) for c in self.checks)


def quasi_transverse_check(cycle: SimpleCycle) -> CheckResult:
    """Verify the two heteroclinic intersection geometries.

    At (x0, 0, 0)_P the tangent of W^s(p) (the ss block) and the T_in image
    of the tangent of W^u(q) (the uu block) must meet trivially and span an
    (n-1)-dimensional space.  At (0, y+, 0)_P the tangents of W^u(p) and of
    the T_out preimage of W^s(q) must span all n dimensions.
    """
    s, u = cycle.dims.s, cycle.dims.u
    n = cycle.dims.n
    checks = []

    ss_span = np.hstack([np.eye(s), np.zeros((s, 1 + u))])
    # T_in maps the uu block into the uu block; image tangents of W^u(q)
    uu_image = np.hstack([np.zeros((u, s + 1)), cycle.T_in.U])
    stacked = np.vstack([ss_span, uu_image])
    rank = int(np.linalg.matrix_rank(stacked))
    checks.append(
        Check(
            "quasi-transverse at (x0,0,0)_P: trivial intersection, span n-1",
            rank == s + u == n - 1,
            {"rank": rank, "expected": n - 1},
        )
    )

    # W^u(p) spans {c, uu}; W^s(q) spans {ss, c}, pulled back through T_out
    wu_p = np.hstack([np.zeros((u + 1, s)), np.eye(u + 1)])
    ws_q_back = np.zeros((s + 1, n))
    ws_q_back[:s, :s] = np.linalg.inv(cycle.T_out.S)
    ws_q_back[s, s] = 1.0 / cycle.T_out.c
    stacked2 = np.vstack([wu_p, ws_q_back])
    rank2 = int(np.linalg.matrix_rank(stacked2))
    checks.append(
        Check(
            "transverse at (0,y+,0)_P: tangents span the full space",
            rank2 == n,
            {"rank": rank2, "expected": n},
        )
    )
    return CheckResult(tuple(checks))


def reference_cycle() -> SimpleCycle:
    """The minimal instance used throughout the test suite.

    s = u = 1, mu = 2, lambda = 1/2, y+ = 1, y- = -1, z0 = x0 = 1, with
    transitions pinned by their heteroclinic incidences.  All blocks are
    dyadic so every volume defect is exactly zero.
    """
    dims = SplittingDims(1, 1)
    A = BlockAffineMap("P", "P", S=[[0.25]], c=2.0, U=[[2.0]])
    B = BlockAffineMap("Q", "Q", S=[[0.5]], c=0.5, U=[[4.0]])
    y_plus, y_minus = 1.0, -1.0
    z0, x0 = np.array([1.0]), np.array([1.0])
    # T_out(0, 1, 0) = (0, -1, 0):  y translation = y- - y+ = -2
    T_out = BlockAffineMap("P", "Q", S=[[0.5]], c=1.0, U=[[2.0]], by=y_minus - y_plus)
    # T_in(0, 0, 1) = (1, 0, 0):  bx = x0, bz = -U z0
    T_in = BlockAffineMap(
        "Q", "P", S=[[0.25]], c=1.0, U=[[4.0]], bx=x0, bz=[-4.0]
    )
    chart_r = 2.0
    U_P = Box.from_center_radius("P", [0.0, 0.0, 0.0], chart_r, "U_P")
    U_Q = Box.from_center_radius("Q", [0.0, 0.0, 0.0], chart_r, "U_Q")
    V = Box.from_center_radius("Q", [0.0, 0.0, 1.0], 0.25, "V")
    W = Box.from_center_radius("P", [0.0, 1.0, 0.0], 0.25, "W")
    return SimpleCycle(
        dims=dims,
        A=A,
        B=B,
        T_out=T_out,
        T_in=T_in,
        y_plus=y_plus,
        y_minus=y_minus,
        z0=z0,
        x0=x0,
        U_P=U_P,
        U_Q=U_Q,
        V=V,
        W=W,
    )
