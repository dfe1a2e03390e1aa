import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blender_forge.core_affine import (
    BlockAffineMap,
    Box,
    ChartPoint,
    SplittingDims,
    apply_map,
    compose,
    compose_chain,
    identity_map,
    invert,
    iterate,
    map_box,
    maps_close,
    volume_defect,
)
from blender_forge.errors import (
    ChartMismatchError,
    DimensionMismatchError,
    SingularBlockError,
)


def _random_map(rng, s=1, u=1, chart=("P", "P")):
    def invertible(k):
        while True:
            m = rng.uniform(-2.0, 2.0, size=(k, k))
            if abs(np.linalg.det(m)) > 0.1:
                return m

    c = rng.uniform(0.2, 3.0) * rng.choice([-1.0, 1.0])
    return BlockAffineMap(
        chart[0],
        chart[1],
        invertible(s),
        c,
        invertible(u),
        bx=rng.uniform(-1, 1, size=s),
        by=rng.uniform(-1, 1),
        bz=rng.uniform(-1, 1, size=u),
    )


class TestConstruction:
    def test_dims(self):
        d = SplittingDims(2, 3)
        assert d.n == 6

    def test_trivial_bundle_rejected(self):
        with pytest.raises(DimensionMismatchError):
            SplittingDims(0, 1)

    def test_zero_center_rejected(self):
        with pytest.raises(SingularBlockError):
            BlockAffineMap("P", "P", [[1.0]], 0.0, [[1.0]])

    def test_singular_block_rejected(self):
        with pytest.raises(SingularBlockError):
            BlockAffineMap("P", "P", [[0.0]], 1.0, [[1.0]])

    def test_translation_defaults(self):
        m = BlockAffineMap("P", "P", [[1.0]], 1.0, [[1.0]])
        assert np.all(m.bx == 0.0) and m.by == 0.0 and np.all(m.bz == 0.0)


class TestApplyCompose:
    def test_identity(self):
        p = ChartPoint("P", [0.3], -0.7, [1.1])
        q = apply_map(identity_map(SplittingDims(1, 1), "P"), p)
        assert q.distance(p) == 0.0

    def test_chart_mismatch(self):
        m = BlockAffineMap("Q", "Q", [[1.0]], 1.0, [[1.0]])
        with pytest.raises(ChartMismatchError):
            apply_map(m, ChartPoint("P", [0.0], 0.0, [0.0]))

    def test_compose_matches_sequential_application(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            f = _random_map(rng, s=2, u=2)
            g = _random_map(rng, s=2, u=2)
            p = ChartPoint("P", rng.uniform(-1, 1, 2), rng.uniform(-1, 1), rng.uniform(-1, 1, 2))
            lhs = apply_map(compose(g, f), p)
            rhs = apply_map(g, apply_map(f, p))
            assert lhs.distance(rhs) <= 1e-12

    def test_compose_chain_order(self):
        rng = np.random.default_rng(11)
        f, g, h = (_random_map(rng) for _ in range(3))
        chained = compose_chain([f, g, h])
        assert maps_close(chained, compose(h, compose(g, f)))

    def test_chart_chain_mismatch(self):
        f = BlockAffineMap("P", "Q", [[1.0]], 1.0, [[1.0]])
        with pytest.raises(ChartMismatchError):
            compose(f, f)

    def test_center_multiplier_is_literal_product(self):
        f = BlockAffineMap("P", "P", [[0.5]], 2.0, [[2.0]])
        g = BlockAffineMap("P", "P", [[0.5]], 0.5, [[2.0]])
        assert compose(g, f).c == 1.0

    def test_iterate(self):
        rng = np.random.default_rng(3)
        f = _random_map(rng)
        assert maps_close(iterate(f, 3), compose(f, compose(f, f)))

    def test_iterate_rejects_transitions(self):
        f = BlockAffineMap("P", "Q", [[1.0]], 1.0, [[1.0]])
        with pytest.raises(ChartMismatchError):
            iterate(f, 2)


class TestInvert:
    @settings(max_examples=200, deadline=None)
    @given(
        st.floats(-2, 2).filter(lambda v: abs(v) > 0.05),
        st.floats(-3, 3).filter(lambda v: abs(v) > 0.05),
        st.floats(-2, 2).filter(lambda v: abs(v) > 0.05),
        st.floats(-1, 1),
        st.floats(-1, 1),
        st.floats(-1, 1),
        st.floats(-1, 1),
        st.floats(-1, 1),
        st.floats(-1, 1),
    )
    def test_inverse_roundtrip(self, a, c, d, bx, by, bz, x, y, z):
        m = BlockAffineMap("P", "P", [[a]], c, [[d]], bx=[bx], by=by, bz=[bz])
        p = ChartPoint("P", [x], y, [z])
        back = apply_map(invert(m), apply_map(m, p))
        assert back.distance(p) <= 1e-9

    def test_inverse_swaps_charts(self):
        m = BlockAffineMap("P", "Q", [[0.5]], 1.0, [[2.0]])
        inv = invert(m)
        assert inv.domain_chart == "Q" and inv.codomain_chart == "P"


class TestVolume:
    def test_preserving(self):
        m = BlockAffineMap("P", "P", [[0.25]], 2.0, [[2.0]])
        assert volume_defect(m) == 0.0

    def test_defect(self):
        m = BlockAffineMap("P", "P", [[0.5]], 2.0, [[2.0]])
        assert volume_defect(m) == pytest.approx(1.0)


class TestBox:
    def test_contains(self):
        box = Box.from_center_radius("P", [0.0, 0.0, 0.0], 1.0)
        assert box.contains_point(ChartPoint("P", [0.5], -1.0, [0.0]))
        assert not box.contains_point(ChartPoint("P", [1.5], 0.0, [0.0]))
        assert not box.contains_point(ChartPoint("Q", [0.0], 0.0, [0.0]))

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            Box("P", [1.0], [0.0])

    def test_map_box_is_exact_interval_image(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            m = _random_map(rng, s=2, u=2)
            box = Box("P", rng.uniform(-2, -0.5, 5), rng.uniform(0.5, 2, 5))
            image = map_box(m, box)
            # oracle: the interval hull of all corner images
            corners = []
            for bits in range(2**5):
                v = np.where(
                    [(bits >> i) & 1 for i in range(5)], box.hi, box.lo
                )
                p = ChartPoint("P", v[:2], v[2], v[3:])
                corners.append(apply_map(m, p).as_vector())
            corners = np.array(corners)
            assert np.all(corners >= image.lo - 1e-12)
            assert np.all(corners <= image.hi + 1e-12)
            hull_lo = corners.min(axis=0)
            hull_hi = corners.max(axis=0)
            assert np.allclose(hull_lo, image.lo, atol=1e-9)
            assert np.allclose(hull_hi, image.hi, atol=1e-9)
