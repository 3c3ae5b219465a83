"""Length-scale roots and mode-mixity selection."""

import numpy as np
import pytest

from prognos.curvature import composite_curvature
from prognos.frames import Frame
from prognos.lengthscale import (
    MixityConfig,
    build_roots,
    effective_modulus,
    select_mixity,
    sign_patterns,
    solve_roots,
)
from prognos.rank import build_rank_table


def random_pair(rng, shape=(3, 3), n_dims=4, step=0.3):
    vals = rng.uniform(1.0, 9.0, size=shape + (n_dims,))
    prev = Frame(0, vals, np.ones(shape, dtype=bool))
    cur = Frame(1, vals + rng.uniform(0, step, size=vals.shape), np.ones(shape, dtype=bool))
    return prev, cur


class TestModulus:
    def test_blend_endpoints(self):
        cfg = MixityConfig()
        assert effective_modulus(0.0, cfg) == pytest.approx(1.0 / 9.0)
        assert effective_modulus(1.0, cfg) == pytest.approx(1.0 / 3.0)
        assert effective_modulus(0.5, cfg) == pytest.approx(0.5 / 3 + 0.5 / 9)

    def test_custom_ratios_can_reach_unity(self):
        cfg = MixityConfig(nu_shear=-0.5)
        assert effective_modulus(1.0, cfg) == pytest.approx(1.0)


class TestSolveRoots:
    def test_unit_modulus_magnitude(self):
        cfg = MixityConfig(nu_shear=-0.5)
        roots = solve_roots(4.0, 1.0, dim=0, phi=1.0, cfg=cfg, n_dims=1)
        assert sorted(roots.tolist()) == [-2.0, 2.0]

    def test_sixteen_roots_for_four_dims(self):
        roots = solve_roots(4.0, 1.0, dim=2, phi=0.5, cfg=MixityConfig(), n_dims=4)
        assert roots.shape == (16,)
        # signed roots come in +- pairs
        assert np.sort(roots)[:8].sum() == -np.sort(roots)[8:].sum()

    def test_quiescent_returns_none(self):
        assert solve_roots(4.0, 0.0, 0, 0.5, MixityConfig()) is None

    def test_non_finite_ratio_is_an_error(self):
        from prognos.exceptions import RootSolveError

        with pytest.raises(RootSolveError):
            solve_roots(float("inf"), 1.0, 0, 0.5, MixityConfig())

    def test_scaling_property(self):
        cfg = MixityConfig()
        rng = np.random.default_rng(0)
        for _ in range(50):
            value = rng.uniform(0.1, 100)
            delta = rng.uniform(0.1, 10)
            c = rng.uniform(0.1, 10)
            base = solve_roots(value, delta, 0, 0.3, cfg)
            scaled = solve_roots(c * value, delta, 0, 0.3, cfg)
            assert np.allclose(np.abs(scaled), np.sqrt(c) * np.abs(base))

    def test_sign_patterns_shape(self):
        pats = sign_patterns(4)
        assert pats.shape == (16, 4)
        assert len({tuple(row) for row in pats.tolist()}) == 16


class TestBuildRoots:
    def test_constant_pair_fully_quiescent(self):
        vals = np.random.default_rng(1).uniform(1, 9, size=(3, 3, 4))
        prev = Frame(0, vals, np.ones((3, 3), dtype=bool))
        cur = Frame(1, vals.copy(), np.ones((3, 3), dtype=bool))
        table = build_rank_table(prev, cur)
        roots = build_roots(table, MixityConfig())
        assert roots.quiescent.all()
        assert np.isnan(roots.roots_short).all()

    def test_equal_h_and_r_give_equal_roots(self):
        rng = np.random.default_rng(2)
        prev, cur = random_pair(rng)
        table = build_rank_table(prev, cur)
        table.r_cur = table.h_cur.copy()
        roots = build_roots(table, MixityConfig())
        active = ~roots.quiescent
        assert np.array_equal(
            roots.roots_short[active], roots.roots_long[active], equal_nan=True
        )

    def test_root_cardinality_on_random_pair(self):
        rng = np.random.default_rng(3)
        prev, cur = random_pair(rng)
        table = build_rank_table(prev, cur)
        roots = build_roots(table, MixityConfig())
        counts = np.isfinite(roots.roots_short).sum(axis=2)
        assert set(counts[~roots.quiescent].tolist()) == {16}
        assert counts[roots.quiescent].sum() == 0

    def test_shared_sign_patterns_across_variants(self):
        rng = np.random.default_rng(4)
        prev, cur = random_pair(rng)
        roots = build_roots(build_rank_table(prev, cur), MixityConfig())
        active = ~roots.quiescent[:, :, None] & np.isfinite(roots.roots_short)
        prod = roots.roots_short[active] * roots.roots_long[active]
        assert (prod >= 0).all()


class TestMixity:
    def test_argmin_simple(self):
        kappas = np.array([[0.5, 0.5], [0.2, 0.2], [0.9, 0.9]])
        phi, idx = select_mixity(kappas, (0.0, 0.5, 1.0))
        assert (phi, idx) == (0.5, 1)

    def test_flat_curvature_ties_to_smaller_phi(self):
        kappas = np.full((3, 4), 0.7)
        phi, idx = select_mixity(kappas, (0.0, 0.5, 1.0))
        assert (phi, idx) == (0.0, 0)

    def test_build_selection_matches_brute_force(self):
        # acceptance-style check: the selected phi equals an exhaustive
        # re-evaluation of the median |kappa| over each candidate
        rng = np.random.default_rng(5)
        cfg = MixityConfig()
        checked = 0
        while checked < 100:
            prev, cur = random_pair(rng, shape=(2, 3))
            table = build_rank_table(prev, cur)
            roots = build_roots(table, cfg)
            signs = sign_patterns(4)
            for n in range(table.n_points):
                if roots.quiescent[n].all():
                    continue
                medians = []
                for phi in cfg.phi_grid:
                    e = float(effective_modulus(phi, cfg))
                    abs_k = []
                    for d in range(4):
                        if roots.quiescent[n, d]:
                            continue
                        mag_s = np.sqrt(
                            abs(e * table.h_cur[n, d] / table.delta_h[n, d])
                        )
                        mag_l = np.sqrt(
                            abs(e * table.r_cur[n, d] / table.delta_h[n, d])
                        )
                        for k in range(16):
                            kap = composite_curvature(
                                table.h_cur[n, d],
                                table.r_cur[n, d],
                                mag_s * signs[k, d],
                                mag_l * signs[k, d],
                            )
                            abs_k.append(abs(kap))
                    medians.append(np.median(abs_k))
                expected = int(np.argmin(medians))
                assert roots.phi_index[n] == expected
                checked += 1
