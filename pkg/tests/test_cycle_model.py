import numpy as np
import pytest

import blender_forge as bf
from blender_forge.core_affine import ChartPoint, apply_map
from blender_forge.cycle_model import Itinerary, cycle_itinerary
from blender_forge.errors import ChartMismatchError, DomainEscapeError


class TestReferenceModel:
    def test_validates(self, base):
        report = bf.validate(base)
        assert report.passed, str(report)

    def test_multipliers(self, base):
        assert base.mu == 2.0
        assert base.lam == 0.5
        assert base.y_plus == 1.0
        assert base.y_minus == -1.0
        assert base.delta_y == -2.0

    def test_volume_preserving(self, base):
        for m in (base.A, base.B, base.T_out, base.T_in):
            assert bf.volume_defect(m) == 0.0

    def test_heteroclinic_incidences(self, base):
        out = apply_map(base.T_out, base.heteroclinic_out())
        assert out.distance(ChartPoint("Q", [0.0], -1.0, [0.0])) == 0.0
        inn = apply_map(base.T_in, base.heteroclinic_in())
        assert inn.distance(ChartPoint("P", [1.0], 0.0, [0.0])) == 0.0


class TestItinerary:
    def test_unknown_symbol(self):
        with pytest.raises(ValueError):
            Itinerary(("A", "X"))

    def test_chart_consistency(self):
        with pytest.raises(ChartMismatchError):
            Itinerary(("A", "B")).check_chart_consistency()

    def test_cycle_itinerary_word(self):
        itin = cycle_itinerary(2, 3)
        assert itin.word == ("T_out", "B", "B", "T_in", "A", "A", "A")


class TestOrbit:
    def test_schematic_center_trace(self, base):
        # one pass with m = 2, n = 1 starting at the transverse point
        start = ChartPoint("P", [0.0], 1.0, [0.0])
        trace = bf.orbit(
            base, start, ("T_out", "B", "B", "T_in", "A"), check_domains=False
        )
        ys = [p.y for p in trace]
        assert ys == [1.0, -1.0, -0.5, -0.25, -0.25, -0.5]

    def test_domain_escape_names_step(self, base):
        start = ChartPoint("P", [0.0], 1.0, [0.0])
        with pytest.raises(DomainEscapeError) as err:
            bf.orbit(base, start, ("T_out", "B", "B", "T_in", "A"))
        assert err.value.step == 3  # T_in requires the point to lie in V

    def test_chart_mismatch_start(self, base):
        start = ChartPoint("Q", [0.0], 0.0, [0.0])
        with pytest.raises(ChartMismatchError):
            bf.orbit(base, start, ("A",))

    def test_orbit_matches_composition(self, base):
        rng = np.random.default_rng(5)
        for _ in range(25):
            start = ChartPoint(
                "P", rng.uniform(-1, 1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1, 1)
            )
            word = cycle_itinerary(3, 2)
            trace = bf.orbit(base, start, word, check_domains=False)
            chain = bf.compose_chain([base.map_for(sym) for sym in word])
            assert trace[-1].distance(apply_map(chain, start)) <= 1e-12


class TestQuasiTransversality:
    def test_reference_ranks(self, base):
        result = bf.quasi_transverse_check(base)
        assert result.passed, str(result)
        assert result.checks[0].measured["rank"] == base.dims.n - 1
        assert result.checks[1].measured["rank"] == base.dims.n

    def test_manifold_slices(self, base):
        ws_p = bf.manifold_slice(base, "W^s_p")
        assert ws_p.dimension == base.dims.s
        wu_p = bf.manifold_slice(base, "W^u_p")
        assert wu_p.dimension == base.dims.u + 1
        assert wu_p.spanning_vectors().shape == (base.dims.u + 1, base.dims.n)

    def test_slice_distance(self, base):
        ws_p = bf.manifold_slice(base, "W^s_p")
        p = ChartPoint("P", [0.5], 0.3, [0.4])
        assert ws_p.distance_to(p) == pytest.approx(np.hypot(0.3, 0.4))
