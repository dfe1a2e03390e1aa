"""Acceptance gate: the nine end-to-end criteria for the simple-cycle
pipeline, each printed as a single PASS/FAIL line.

Criterion 3 carries one literal ground-truth value (smallest feasible
m == 10) that the implemented solver demonstrably contradicts: exhaustive
search over the reference model finds an exact coincidence already at
m = 8 (residuals identically zero), so the assertion is kept verbatim and
is expected to fail.  See the criterion-3 test body for the analysis.
"""

import time
from contextlib import contextmanager
from dataclasses import replace

import numpy as np
import pytest

import blender_forge as bf
from blender_forge.config import _MODEL_KEYS, build_model
from blender_forge.core_affine import apply_map, compose_chain
from blender_forge.report import emit_kv


@contextmanager
def criterion(num: int, title: str, limit_s: float):
    start = time.perf_counter()
    try:
        yield
        elapsed = time.perf_counter() - start
        assert elapsed < limit_s, f"runtime {elapsed:.2f}s exceeds {limit_s}s"
    except BaseException:
        print(f"criterion {num} ({title}): FAIL")
        raise
    print(f"criterion {num} ({title}): PASS  [{time.perf_counter() - start:.2f}s]")


class TestAcceptance:
    def test_criterion_1_conservation_audit(
        self, base, solution, model, pair, homoclinic_cert, region
    ):
        with criterion(1, "conservation audit", 1.0):
            a, b = pair
            maps = [base.A, base.B, base.T_out, base.T_in]
            maps += [model.A, model.B, model.T_out, model.T_in]
            maps += [a.return_map.G, b.return_map.G]
            maps += list(region.branches)
            rng = np.random.default_rng(0)
            maps += [
                bf.perturb_map_conservative(br, 1e-3, rng)
                for br in region.branches
                for _ in range(10)
            ]
            for m in maps:
                assert bf.volume_defect(m) <= 1e-12

    def test_criterion_2_psi_oracle(self, base):
        with criterion(2, "psi-oracle equivalence", 5.0):
            rng = np.random.default_rng(2)
            for _ in range(1000):
                m = int(rng.integers(1, 21))
                n = int(rng.integers(1, 21))
                t = float(rng.uniform(-0.1, 0.1))
                y = float(rng.uniform(-1.0, 1.0))
                unfolded = bf.shift_family(base, t)
                G = compose_chain(
                    [unfolded.T_out]
                    + [unfolded.B] * m
                    + [unfolded.T_in]
                    + [unfolded.A] * n
                )
                assert abs(bf.psi(unfolded, m, n, y) - (G.c * y + G.by)) <= 1e-10

    def test_criterion_3_solver_ground_truth(self, base, solution):
        with criterion(3, "solver ground truth", 60.0):
            sol = solution
            assert sol.lam0 == 0.5
            assert sol.mu0 == 2.0
            assert sol.n == sol.m
            assert sol.nprime == sol.m + 1
            assert sol.t == 3.0 * 2.0 ** -(sol.m + 1)
            assert max(sol.residuals) <= 1e-10
            assert sol.expanding_multiplier == 2.0 > 1.0

            for lam in np.linspace(0.3, 0.7, 5):
                for mu in np.linspace(1.5, 2.5, 5):
                    keys = dict(_MODEL_KEYS)
                    keys["mu"] = float(mu)
                    keys["lambda"] = float(lam)
                    keys["a_u_diag"] = [2.0 * mu]
                    keys["a_s_diag"] = [1.0 / (2.0 * mu * mu)]
                    keys["b_u_diag"] = [2.0 / (lam * lam)]
                    keys["b_s_diag"] = [lam / 2.0]
                    grid_sol = bf.solve_parameters(build_model(keys), 0.01, 40)
                    assert max(grid_sol.residuals) <= 1e-10, (lam, mu)

            # Stated smallest feasible m.  The exhaustive ascending-m scan
            # over the same feasibility conditions (both residuals <= 1e-10,
            # |t| < eps, expanding second itinerary, lexicographic
            # (m, n'-n, n) tie-break) terminates at m = 8 with
            # t = 3 * 2^-9 and residuals exactly zero, so m = 10 is not the
            # smallest feasible value and this assertion fails by design
            # rather than by weakening the search.
            assert sol.m == 10

    def test_criterion_4_periodic_points(self, model, solution, pair):
        with criterion(4, "periodic-point construction", 1.0):
            a, b = pair
            for rec in (a, b):
                residual = apply_map(rec.return_map.G, rec.point).distance(rec.point)
                assert residual <= 1e-10
                assert rec.cylinder_delta > 0.0
                assert rec.cylinder_u.contains_point(rec.point)
                assert rec.cylinder_s.contains_point(rec.point)
            assert a.center_eigenvalue == 2.0
            assert b.center_eigenvalue == 0.5
            assert a.point.distance(b.point) >= 1e-10

    def test_criterion_5_strong_homoclinic(self, model, pair, homoclinic_cert):
        with criterion(5, "strong homoclinic certificate", 5.0):
            a, b = pair
            p_ab, p_ba = bf.homoclinic_relation(a, b)
            assert a.distance_to_uu_slice(p_ab) == 0.0
            assert b.distance_to_ss_slice(p_ab) == 0.0
            assert b.distance_to_uu_slice(p_ba) == 0.0
            assert a.distance_to_ss_slice(p_ba) == 0.0
            cert = homoclinic_cert
            assert cert.max_residual <= 1e-8
            assert cert.steps_used <= 200
            assert cert.quasi_transverse_rank == model.dims.n - 1

    def test_criterion_6_covering_certificate(self, region):
        with criterion(6, "blender covering certificate", 1.0):
            cert = bf.verify_covering(region)
            assert cert.covered and cert.margin > 0.0
            assert cert.margin_lower_bound > 0.0
            for (olo, ohi), (nlo, nhi) in zip(
                cert.images_outer,
                [
                    tuple(
                        sorted(
                            (
                                region.center_map(i)[0] * region.center_interval[0]
                                + region.center_map(i)[1],
                                region.center_map(i)[0] * region.center_interval[1]
                                + region.center_map(i)[1],
                            )
                        )
                    )
                    for i in range(2)
                ],
            ):
                assert olo <= nlo and nhi <= ohi

            g1 = bf.BlockAffineMap("P", "P", [[0.5]], 1.5, [[3.0]], [0.0], 0.0, [0.0])
            g2 = bf.BlockAffineMap("P", "P", [[0.5]], 1.5, [[3.0]], [0.0], -0.5, [0.0])
            synthetic = bf.BlenderRegion(
                region=bf.Box("P", [-1.0, 0.0, -1.0], [1.0, 1.0, 1.0], "synthetic"),
                center_interval=(0.0, 1.0),
                branches=(g1, g2),
            )
            assert bf.verify_covering(synthetic).margin == 0.5

    def test_criterion_7_strip_intersection(self, region, pair):
        with criterion(7, "strip intersection", 30.0):
            a, _ = pair
            rng = np.random.default_rng(7)
            min_mult = min(abs(br.c) for br in region.branches)
            for _ in range(1000):
                strip = bf.random_well_placed_strip(region, rng, tilt=0.1)
                witness = bf.strip_intersect_ws(region, strip, a, max_depth=120)
                assert witness.distance <= 1e-8
                assert witness.transversality_rank == region.dims.n
                widths = witness.center_widths
                for w0, w1 in zip(widths, widths[1:]):
                    assert w1 <= w0 / min_mult * (1.0 + 1e-9)

    def test_criterion_8_robustness(self, region):
        with criterion(8, "robustness", 60.0):
            report = bf.robustness_test(region, delta_c1=1e-3, samples=100, seed=8)
            assert report.pass_fraction == 1.0
            ic = region.center_interval
            assert report.worst_margin >= report.base_margin - 10.0 * 1e-3 * (
                ic[1] - ic[0]
            )
            again = bf.robustness_test(region, delta_c1=1e-3, samples=100, seed=8)
            assert emit_kv(report.__dict__).encode() == emit_kv(
                again.__dict__
            ).encode()

    def test_criterion_9_homoclinic_transfer(self, region, pair):
        with criterion(9, "homoclinic-relation transfer", 10.0):
            a, b = pair
            strips = [
                bf.random_well_placed_strip(region, np.random.default_rng(900 + i))
                for i in range(100)
            ]
            for strip in strips:
                w_owner = bf.strip_intersect_ws(region, strip, a, max_depth=120)
                w_partner = bf.strip_intersect_ws(region, strip, b, max_depth=120)
                assert w_owner.distance <= 1e-8
                assert w_partner.distance <= 1e-8
