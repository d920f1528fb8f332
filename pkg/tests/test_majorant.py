import numpy as np
import pytest

from livsic_germs.cocycles import coboundary_from, random_germ_observable
from livsic_germs.germs import deviation_from_identity, germ_compose
from livsic_germs.majorant import (MajorantTable, build_J_scaled, certify_kappa,
                                   check_majorant_domination, reassembly_check,
                                   solve_G_scaled)
from livsic_germs.series import series_space
from livsic_germs.solver import (HolderEstimate, coefficient_seminorms,
                                 germ_solve, orbit_pair_sample)


class TestGeneratingGerm:
    def test_unit_scale_one_variable(self):
        J = build_J_scaled(1.0, 1, 3)
        assert J.coefficient(0, (1,)) == 1.0
        assert J.coefficient(0, (2,)) == -1.0
        assert J.coefficient(0, (3,)) == -1.0

    def test_scale_two(self):
        J = build_J_scaled(2.0, 1, 2)
        assert J.coefficient(0, (2,)) == -2.0

    def test_linear_part_is_identity(self):
        for S in (0.5, 1.0, 7.0):
            J = build_J_scaled(S, 2, 3)
            np.testing.assert_array_equal(J.linear_part, np.eye(2))

    def test_multivariate_coefficients(self):
        J = build_J_scaled(3.0, 2, 3)
        assert J.coefficient(0, (1, 1)) == -3.0
        assert J.coefficient(1, (2, 1)) == -9.0

    def test_invalid_scale(self):
        with pytest.raises(ValueError):
            build_J_scaled(0.0, 1, 2)


class TestInverseTable:
    def test_hand_derived_coefficients(self):
        table = solve_G_scaled(1.0, 1, 3)
        assert table.g(0, (2,)) == pytest.approx(1.0)
        assert table.g(0, (3,)) == pytest.approx(3.0)

    def test_compositional_inverse_contract(self):
        from livsic_germs.germs import germ_invert

        for S in (1.0, 4.0):
            J = build_J_scaled(S, 2, 4)
            G = germ_invert(J)
            assert deviation_from_identity(germ_compose(J, G)) < 1e-10

    @pytest.mark.parametrize("S", [1.0, 10.0, 100.0])
    @pytest.mark.parametrize("d", [1, 2])
    def test_positivity(self, S, d):
        table = solve_G_scaled(S, d, 6)
        assert table.max_imag <= 1e-14
        assert all(g > 0 for g in table.coefficients.values())

    def test_inverse_linear_part_is_identity(self):
        from livsic_germs.germs import germ_invert

        for S in (0.5, 2.0, 50.0):
            G = germ_invert(build_J_scaled(S, 2, 4))
            np.testing.assert_allclose(G.linear_part, np.eye(2), atol=1e-15)

    def test_monotone_in_scale(self):
        tables = [solve_G_scaled(S, 2, 5) for S in (1.0, 2.0, 4.0, 8.0)]
        for lo, hi in zip(tables, tables[1:]):
            for key in lo.coefficients:
                assert lo.coefficients[key] <= hi.coefficients[key] + 1e-12

    def test_growth_bound(self):
        for S in (1.0, 3.0, 25.0):
            table = solve_G_scaled(S, 2, 6)
            for (i, idx), g in table.coefficients.items():
                assert g <= table.growth_rate ** (sum(idx) - 1) + 1e-9

    def test_record_round_trip(self):
        table = solve_G_scaled(2.5, 2, 4)
        back = MajorantTable.from_record(table.to_record())
        assert back.coefficients == table.coefficients
        assert back.growth_rate == table.growth_rate


class TestCertifyKappa:
    def test_identity_cocycle_returns_grid_minimum(self):
        values = {(0, (2,)): np.zeros(5), (0, (3,)): np.zeros(5)}
        bounds = certify_kappa(values, [(0, 1)], [0.5], alpha=1.0)
        assert bounds.kappa == 0.01
        assert bounds.kappa_exact == 0.0

    def test_generated_cocycle_kappa_below_one(self, shift, rng):
        h = random_germ_observable(shift, 1, 4, rng, rho=0.3)
        f = coboundary_from(shift, h)
        pts = shift.dense_orbit_prefix(300)
        arrays = f.orbit_germ_arrays(shift, pts, consecutive=True)
        space = series_space(1, 4)
        values = {(0, space.indices[pos]): arrays[:, 0, pos]
                  for pos in range(1, space.size)}
        pairs = orbit_pair_sample(shift, pts, 80, rng)
        dists = [shift.dist(pts[a], pts[b]) for a, b in pairs]
        bounds = certify_kappa(values, pairs, dists, alpha=1.0)
        assert bounds.kappa <= 1.0

    def test_scaling_property(self, rng):
        base = {(0, (2,)): rng.normal(size=6) + 1j * rng.normal(size=6),
                (0, (3,)): rng.normal(size=6) + 1j * rng.normal(size=6)}
        pairs = [(0, 1), (2, 3)]
        dists = [0.5, 0.25]
        t = 0.5
        scaled = {(i, idx): (t ** sum(idx)) * vals
                  for (i, idx), vals in base.items()}
        a = certify_kappa(base, pairs, dists, alpha=1.0)
        b = certify_kappa(scaled, pairs, dists, alpha=1.0)
        assert b.kappa_exact == pytest.approx(t * a.kappa_exact)

    def test_linear_entries_ignored(self):
        values = {(0, (1,)): np.ones(4) * 100.0, (0, (2,)): np.zeros(4)}
        bounds = certify_kappa(values, [(0, 1)], [1.0], alpha=1.0)
        assert bounds.kappa_exact == 0.0


class TestDomination:
    def test_identity_cocycle_trivially_dominated(self):
        table = solve_G_scaled(1.0, 1, 4)
        seminorms = {
            (0, idx): HolderEstimate(alpha=1.0, seminorm=0.0, sup_norm=0.0,
                                     method="empirical")
            for idx in [(2,), (3,), (4,)]
        }
        report = check_majorant_domination(seminorms, table)
        assert report.passed and report.chain_passed

    def test_violation_reported_not_raised(self):
        table = solve_G_scaled(1.0, 1, 2)
        seminorms = {(0, (2,)): HolderEstimate(alpha=1.0, seminorm=5.0,
                                               sup_norm=1.0, method="empirical")}
        report = check_majorant_domination(seminorms, table)
        assert not report.passed
        assert report.rows[0]["pass"] is False

    def test_chain_violation_detected(self):
        table = solve_G_scaled(1.0, 1, 2)
        seminorms = {(0, (2,)): HolderEstimate(alpha=1.0, seminorm=0.1,
                                               sup_norm=0.5, method="empirical")}
        report = check_majorant_domination(seminorms, table)
        assert report.passed and not report.chain_passed

    def test_end_to_end_domination(self, shift, rng):
        from livsic_germs.solver import livsic_constant

        h_true = random_germ_observable(shift, 1, 4, rng, rho=0.3)
        f = coboundary_from(shift, h_true)
        L = 1500
        result = germ_solve(shift, f, L)
        pairs = orbit_pair_sample(shift, result.points, 150, rng)
        seminorms = coefficient_seminorms(result, 1.0, pairs)
        consts = livsic_constant(shift, 1.0, result.points)
        space = series_space(1, 4)
        values = {(0, space.indices[pos]): result.f_arrays[:, 0, pos]
                  for pos in range(1, space.size)}
        dists = [shift.dist(result.points[a], result.points[b]) for a, b in pairs]
        bounds = certify_kappa(values, pairs, dists, 1.0, K=consts.K)
        table = solve_G_scaled(4.0 * consts.K * bounds.kappa, 1, 4)
        report = check_majorant_domination(seminorms, table, K=consts.K,
                                           kappa=bounds.kappa)
        assert report.passed
        assert report.chain_passed
        assert table.S >= 2.0 * report.threshold / 2.0  # S = 4 K kappa >= 2 K kappa


class TestHolderAlgebra:
    def test_sum_and_product_rules_on_sampled_fields(self, shift, rng):
        # [f+g] <= [f]+[g] and [fg] <= [f]||g|| + [g]||f||, with declared
        # constants on the right (empirical left sides are lower bounds)
        from livsic_germs.solver import holder_seminorm_empirical

        words = [tuple(w) for w in np.ndindex(2, 2, 2)]
        f_vals = {w: complex(rng.normal(), rng.normal()) for w in words}
        g_vals = {w: complex(rng.normal(), rng.normal()) for w in words}
        from livsic_germs.cocycles import ShiftCylinderField

        f = ShiftCylinderField(1, f_vals)
        g = ShiftCylinderField(1, g_vals)
        pts = shift.dense_orbit_prefix(400)
        pairs_idx = orbit_pair_sample(shift, pts, 120, rng)
        pairs = [(pts[a], pts[b]) for a, b in pairs_idx]
        dist = shift.dist
        est_f = holder_seminorm_empirical(f.evaluate, 1.0, pairs, dist)
        est_g = holder_seminorm_empirical(g.evaluate, 1.0, pairs, dist)
        est_sum = holder_seminorm_empirical(
            lambda x: f.evaluate(x) + g.evaluate(x), 1.0, pairs, dist)
        est_prod = holder_seminorm_empirical(
            lambda x: f.evaluate(x) * g.evaluate(x), 1.0, pairs, dist)
        assert est_sum.seminorm <= est_f.seminorm + est_g.seminorm + 1e-9
        sup_f = max(abs(v) for v in f_vals.values())
        sup_g = max(abs(v) for v in g_vals.values())
        assert est_prod.seminorm <= (f.holder_bound() * sup_g
                                     + g.holder_bound() * sup_f + 1e-9)


class TestReassembly:
    def test_weight_factor_one_variable_half(self):
        # geometric series: sum delta^{2s} = (1/4) / (3/4) = 1/3
        from livsic_germs.majorant import _weight_factor

        assert _weight_factor(1, 0.5) == pytest.approx((1.0 / 3.0) ** 0.5)

    def test_constant_fields_pass(self):
        space = series_space(1, 3)
        arr = np.zeros((1, space.size), dtype=complex)
        arr[0, 1] = 0.5
        report = reassembly_check(space, [(arr, arr.copy())], [0.3],
                                  C=1.0, R=1.0, delta=0.5, alpha=1.0)
        assert report.passed

    def test_generated_cocycle_assembles(self, shift, rng):
        h = random_germ_observable(shift, 2, 4, rng, rho=0.3)
        f = coboundary_from(shift, h)
        pts = shift.dense_orbit_prefix(400)
        arrays = f.orbit_germ_arrays(shift, pts, consecutive=True)
        pairs = orbit_pair_sample(shift, pts, 200, rng)
        dists = [shift.dist(pts[a], pts[b]) for a, b in pairs]
        space = series_space(2, 4)
        degs = space.degrees.astype(float)
        # the smallest per-coefficient budget the pairs certify, at R = 1
        C = 0.0
        for (a, b), dd in zip(pairs, dists):
            diff = np.abs(arrays[a] - arrays[b]) / dd
            C = max(C, float(np.max(diff)))
        value_pairs = [(arrays[a], arrays[b]) for a, b in pairs]
        report = reassembly_check(space, value_pairs, dists, C=C, R=1.0,
                                  delta=0.5, alpha=1.0)
        assert report.decay_passed
        assert report.pairs_passed
        assert report.C_assembled == pytest.approx(
            np.sqrt(2.0) * C * report.weight)

    def test_invalid_delta(self):
        space = series_space(1, 2)
        with pytest.raises(ValueError):
            reassembly_check(space, [], [], C=1.0, R=1.0, delta=1.0, alpha=1.0)
