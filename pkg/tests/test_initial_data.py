"""Lattice discretization of initial densities."""

import math

import numpy as np
import pytest

from aggblob.errors import (
    DimensionMismatchError,
    EmptySupportError,
    ValidationError,
)
from aggblob.initial_data import (
    IndicatorBall,
    IndicatorBox,
    ParticleGrid,
    PolyBump,
    Scaled,
    SmoothBump,
    StarPatch,
    discretize,
    normalized,
    profile_from_config,
)


class TestProfiles:
    def test_poly_bump_values(self):
        p = PolyBump(p=2.0)
        assert p.eval_rho0(np.array([[0.0]]))[0] == 1.0
        assert p.eval_rho0(np.array([[0.5]]))[0] == pytest.approx(0.5625)
        assert p.eval_rho0(np.array([[1.0]]))[0] == 0.0
        assert p.eval_rho0(np.array([[1.5]]))[0] == 0.0

    def test_poly_bump_mass_formulas(self):
        # 1D: sqrt(pi) Gamma(p+1) / Gamma(p+3/2); 2D: pi / (p+1)
        assert PolyBump(p=1.0).mass(1) == pytest.approx(4.0 / 3.0)
        assert PolyBump(p=2.0).mass(1) == pytest.approx(16.0 / 15.0)
        assert PolyBump(p=2.0).mass(2) == pytest.approx(math.pi / 3.0)

    def test_indicator_boundary_included(self):
        ball = IndicatorBall(radius=1.0)
        assert ball.eval_rho0(np.array([[1.0, 0.0]]))[0] == 1.0
        assert ball.eval_rho0(np.array([[1.0001, 0.0]]))[0] == 0.0
        box = IndicatorBox(halfwidths=(1.0, 0.5))
        assert box.eval_rho0(np.array([[1.0, 0.5]]))[0] == 1.0
        assert box.eval_rho0(np.array([[1.0, 0.51]]))[0] == 0.0

    def test_smooth_bump_is_flat_at_the_edge(self):
        s = SmoothBump()
        assert s.eval_rho0(np.array([[0.0]]))[0] == pytest.approx(math.exp(-1.0))
        assert s.eval_rho0(np.array([[0.999999]]))[0] == 0.0  # underflows
        assert s.eval_rho0(np.array([[1.0]]))[0] == 0.0

    def test_star_patch_fivefold_symmetry(self):
        star = StarPatch()
        rng = np.random.default_rng(2)
        pts = rng.uniform(-0.4, 0.4, size=(200, 2))
        rot = 2.0 * math.pi / 5.0
        R = np.array([[math.cos(rot), -math.sin(rot)],
                      [math.sin(rot), math.cos(rot)]])
        np.testing.assert_array_equal(star.eval_rho0(pts @ R.T), star.eval_rho0(pts))

    def test_star_patch_area(self):
        assert StarPatch().mass(2) == pytest.approx(9.0 * math.pi / 128.0)
        grid = discretize(StarPatch(), 0.005, 2)
        assert grid.total_mass == pytest.approx(9.0 * math.pi / 128.0, rel=0.05)

    def test_scaled_and_normalized(self):
        prof = Scaled(PolyBump(p=2.0), 3.0)
        assert prof.eval_rho0(np.array([[0.0, 0.0]]))[0] == 3.0
        assert prof.mass(2) == pytest.approx(math.pi)
        unit = normalized(PolyBump(p=2.0), 2)
        assert unit.mass(2) == pytest.approx(1.0)

    def test_validation(self):
        with pytest.raises(ValidationError):
            PolyBump(p=0.0)
        with pytest.raises(ValidationError):
            IndicatorBall(radius=-1.0)
        with pytest.raises(DimensionMismatchError):
            StarPatch().eval_rho0(np.array([[0.1]]))


class TestDiscretize:
    def test_poly_bump_point_count(self):
        grid = discretize(PolyBump(p=20.0), 0.04, 1)
        assert grid.n == 49

    def test_indicator_keeps_boundary_nodes(self):
        grid = discretize(IndicatorBall(radius=1.0), 0.5, 1)
        assert grid.n == 5
        np.testing.assert_array_equal(np.sort(grid.positions[:, 0]),
                                      [-1.0, -0.5, 0.0, 0.5, 1.0])

    def test_indicator_boundary_2d(self):
        grid = discretize(IndicatorBall(radius=1.0), 0.25, 2)
        pos = set(map(tuple, grid.positions))
        assert (1.0, 0.0) in pos and (0.0, -1.0) in pos
        assert (0.75, 0.75) not in pos  # r > 1

    def test_origin_on_grid(self):
        grid = discretize(PolyBump(p=2.0), 0.3, 2)
        assert (0.0, 0.0) in set(map(tuple, grid.positions))

    def test_weights_and_positions(self):
        h = 0.1
        grid = discretize(PolyBump(p=2.0), h, 2)
        np.testing.assert_array_equal(grid.positions, h * grid.indices)
        np.testing.assert_allclose(grid.weights, grid.rho0 * h**2, rtol=1e-15)

    def test_riemann_mass(self):
        grid = discretize(PolyBump(p=2.0), 0.01, 1)
        assert grid.total_mass == pytest.approx(PolyBump(p=2.0).mass(1), abs=1e-3)
        grid2 = discretize(PolyBump(p=2.0), 0.02, 2)
        assert grid2.total_mass == pytest.approx(math.pi / 3.0, abs=2e-3)

    def test_h_bounds(self):
        with pytest.raises(ValidationError):
            discretize(PolyBump(), 0.0, 1)
        with pytest.raises(ValidationError):
            discretize(PolyBump(), 0.6, 1)
        discretize(PolyBump(), 0.5, 1)

    def test_empty_support(self):
        class Annulus:
            def eval_rho0(self, x):
                r2 = np.sum(np.asarray(x) ** 2, axis=-1)
                return np.where((r2 > 0.09) & (r2 < 0.16), 1.0, 0.0)

            def support_radius(self):
                return 0.4

        with pytest.raises(EmptySupportError):
            discretize(Annulus(), 0.5, 1)

    def test_arrays_are_read_only(self):
        grid = discretize(PolyBump(p=2.0), 0.2, 1)
        with pytest.raises(ValueError):
            grid.positions[0, 0] = 99.0

    def test_deterministic_ordering(self):
        a = discretize(PolyBump(p=2.0), 0.2, 2)
        b = discretize(PolyBump(p=2.0), 0.2, 2)
        np.testing.assert_array_equal(a.indices, b.indices)
        # row-major in lattice indices
        flat = a.indices[:, 0] * 10_000 + a.indices[:, 1]
        assert np.all(np.diff(flat) > 0)


class TestConfig:
    def test_named_profiles(self):
        assert isinstance(profile_from_config({"profile": "poly_bump", "p": 20}),
                          PolyBump)
        assert isinstance(profile_from_config({"profile": "star_patch"}), StarPatch)
        box = profile_from_config({"profile": "indicator_box",
                                   "halfwidths": [1.0, 1.0]})
        assert box.halfwidths == (1.0, 1.0)

    def test_scale_and_normalize(self):
        prof = profile_from_config({"profile": "poly_bump", "p": 2,
                                    "normalize": True, "dim": 2})
        assert prof.mass(2) == pytest.approx(1.0)
        prof2 = profile_from_config({"profile": "poly_bump", "p": 2, "scale": 2.0})
        assert prof2.factor == 2.0

    def test_unknown_profile(self):
        with pytest.raises(ValidationError):
            profile_from_config({"profile": "mystery"})

    def test_normalize_needs_dim(self):
        with pytest.raises(ValidationError):
            profile_from_config({"profile": "poly_bump", "normalize": True})
