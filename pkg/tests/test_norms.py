"""Grid-function norms, the dual Sobolev norm, and energy diagnostics."""

import math

import numpy as np
import pytest

from aggblob import (
    BlobMethod,
    IndexMismatchError,
    IntegratorConfig,
    ParticleState,
    PolyBump,
    ValidationError,
    build,
    builtin,
    discretize,
    integrate,
    newtonian,
    power_law,
)
from aggblob.norms import (
    GridFunction,
    density_error,
    dual_norm_2,
    energy_delta,
    lp_norm,
    resolve_norm,
    trajectory_error,
    w1p_norm,
)


def random_gridfun(rng, d, h=0.3, span=6, nmax=20):
    n = int(rng.integers(1, nmax))
    idx = np.unique(rng.integers(-span, span + 1, size=(n, d)), axis=0)
    vals = rng.standard_normal(idx.shape[0])
    return GridFunction(h, idx, vals, d)


class TestGridFunction:
    def test_from_entries_sorts_and_accepts_int_keys(self):
        g = GridFunction.from_entries(0.5, {2: 1.0, -1: 3.0, 0: 2.0}, 1)
        assert g.indices[:, 0].tolist() == [-1, 0, 2]
        assert g.values.tolist() == [3.0, 2.0, 1.0]

    def test_positions_scale_indices(self):
        g = GridFunction(0.25, np.array([[2, -4]]), np.array([1.0]), 2)
        assert np.array_equal(g.positions(), [[0.5, -1.0]])

    def test_duplicate_indices_rejected(self):
        with pytest.raises(ValidationError):
            GridFunction(1.0, np.array([[0], [0]]), np.array([1.0, 2.0]), 1)

    def test_shape_validation(self):
        with pytest.raises(IndexMismatchError):
            GridFunction(1.0, np.array([[0], [1]]), np.array([1.0]), 1)
        with pytest.raises(ValidationError):
            GridFunction(0.0, np.array([[0]]), np.array([1.0]), 1)

    def test_arrays_read_only(self):
        g = GridFunction.from_entries(1.0, {0: 1.0}, 1)
        with pytest.raises(ValueError):
            g.values[0] = 2.0


class TestLpNorm:
    def test_constant_five_points(self):
        g = GridFunction.from_entries(0.5, {i: 1.0 for i in range(-2, 3)}, 1)
        assert lp_norm(g, 1) == pytest.approx(2.5, abs=1e-15)
        assert lp_norm(g, math.inf) == 1.0

    def test_single_entry_l2(self):
        g = GridFunction.from_entries(0.1, {0: 3.0}, 1)
        assert lp_norm(g, 2) == pytest.approx(3 * math.sqrt(0.1), rel=1e-14)

    def test_ball_restriction(self):
        g = GridFunction.from_entries(0.5, {i: 1.0 for i in range(-4, 5)}, 1)
        # sites at |i|*0.5 <= 1.0: i in -2..2
        assert lp_norm(g, 1, ball=1.0) == pytest.approx(2.5, abs=1e-15)

    def test_empty_and_bad_exponent(self):
        g = GridFunction(1.0, np.empty((0, 1), dtype=int), np.empty(0), 1)
        assert lp_norm(g, 2) == 0.0
        full = GridFunction.from_entries(1.0, {0: 1.0}, 1)
        with pytest.raises(ValidationError):
            lp_norm(full, 0.5)
        with pytest.raises(ValidationError):
            lp_norm(full, 1, ball=-1.0)


class TestW1pNorm:
    def test_unit_spike(self):
        g = GridFunction.from_entries(1.0, {0: 1.0}, 1)
        assert w1p_norm(g, 2) == pytest.approx(math.sqrt(3.0), rel=1e-14)

    def test_zero_function(self):
        g = GridFunction(1.0, np.empty((0, 1), dtype=int), np.empty(0), 1)
        assert w1p_norm(g, 2) == 0.0

    def test_ramp_dominates_lp(self):
        g = GridFunction.from_entries(0.2, {i: i * 0.2 for i in range(6)}, 1)
        assert w1p_norm(g, 2) >= lp_norm(g, 2)

    def test_interior_differences_vanish(self):
        # constant block: only the two boundary jumps contribute
        g = GridFunction.from_entries(0.5, {i: 2.0 for i in range(4)}, 1)
        jumps = 2 * (2.0 / 0.5) ** 2 * 0.5
        expect = (lp_norm(g, 2) ** 2 + jumps) ** 0.5
        assert w1p_norm(g, 2) == pytest.approx(expect, rel=1e-14)

    def test_2d_spike_counts_all_edges(self):
        g = GridFunction.from_entries(1.0, {(0, 0): 1.0}, 2)
        # value 1 plus four unit differences
        assert w1p_norm(g, 2) == pytest.approx(math.sqrt(5.0), rel=1e-14)

    def test_sup_variant(self):
        g = GridFunction.from_entries(0.5, {0: 1.0}, 1)
        assert w1p_norm(g, math.inf) == pytest.approx(2.0)


class TestDualNorm:
    def test_matches_dense_solve(self):
        g = GridFunction.from_entries(1.0, {0: 1.0}, 1)
        a = np.diag(np.full(5, 3.0)) + np.diag(np.full(4, -1.0), 1) + (
            np.diag(np.full(4, -1.0), -1))
        x = np.linalg.solve(a, np.eye(5)[2])
        assert dual_norm_2(g, 2) == pytest.approx(math.sqrt(x[2]), rel=1e-10)

    def test_dense_solve_random_small_grids(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            n = int(rng.integers(1, 8))
            idx = np.arange(n)[:, None]
            vals = rng.standard_normal(n)
            h = float(rng.uniform(0.1, 2.0))
            margin = int(rng.integers(0, 4))
            g = GridFunction(h, idx, vals, 1)
            m = n + 2 * margin
            a = np.eye(m) + (np.diag(np.full(m, 2.0)) + (
                np.diag(np.full(m - 1, -1.0), 1)) + (
                np.diag(np.full(m - 1, -1.0), -1))) / h**2
            b = np.zeros(m)
            b[margin:margin + n] = vals
            ref = math.sqrt(b @ np.linalg.solve(a, b) * h)
            assert dual_norm_2(g, margin) == pytest.approx(ref, rel=1e-10)

    def test_bounded_by_l2(self):
        rng = np.random.default_rng(11)
        for trial in range(200):
            g = random_gridfun(rng, 1 + trial % 2)
            assert dual_norm_2(g) <= lp_norm(g, 2) * (1 + 1e-12)

    def test_monotone_and_stabilizes_in_margin(self):
        spike = GridFunction.from_entries(1.0, {0: 1.0}, 1)
        vals = [dual_norm_2(spike, m) for m in (2, 4, 8, 16, 32)]
        assert all(b >= a - 1e-14 for a, b in zip(vals, vals[1:]))
        # boundary reflections decay per physical unit covered by the box
        assert abs(vals[-1] - vals[-2]) < 1e-8
        coarse = GridFunction.from_entries(4.0, {0: 1.0}, 1)
        assert abs(dual_norm_2(coarse, 4) - dual_norm_2(coarse, 8)) < 1e-8

    def test_zero_and_validation(self):
        g = GridFunction.from_entries(1.0, {0: 0.0}, 1)
        assert dual_norm_2(g) == 0.0
        with pytest.raises(ValidationError):
            dual_norm_2(g, -1)

    def test_2d_spike_agrees_with_dense(self):
        g = GridFunction.from_entries(0.5, {(0, 0): 1.0}, 2)
        m = 9
        t = np.diag(np.full(m, 2.0)) + np.diag(np.full(m - 1, -1.0), 1) + (
            np.diag(np.full(m - 1, -1.0), -1))
        lap = np.kron(t, np.eye(m)) + np.kron(np.eye(m), t)
        a = np.eye(m * m) + lap / 0.25
        b = np.zeros(m * m)
        b[(m // 2) * m + m // 2] = 1.0
        ref = math.sqrt(b @ np.linalg.solve(a, b) * 0.25)
        assert dual_norm_2(g, 4) == pytest.approx(ref, rel=1e-10)


class TestHolderComparison:
    def test_lq_bounded_by_lp_with_point_count_constant(self):
        rng = np.random.default_rng(3)
        radius = 1.5
        for trial in range(60):
            d = 1 + trial % 2
            h = float(rng.uniform(0.1, 0.4))
            span = int(radius / h)
            g = random_gridfun(rng, d, h=h, span=span)
            pairs = [(1.0, 2.0), (2.0, 4.0), (1.0, math.inf)]
            q, p = pairs[trial % 3]
            npts = g.n
            if math.isinf(p):
                c = (npts * h**d) ** (1.0 / q)
            else:
                c = (npts * h**d) ** (1.0 / q - 1.0 / p)
            assert lp_norm(g, q) <= c * lp_norm(g, p) * (1 + 1e-12)


class TestEnergy:
    def test_quadratic_pair(self):
        reg = build(power_law(2.0, 1), builtin("psi4_1d"), 0.1)
        s = ParticleState(0.0, np.array([[-1.0], [1.0]]), np.array([0.5, 0.5]),
                          np.zeros(2), np.array([[0], [1]]), 1.0, 1)
        assert energy_delta(s, reg) == pytest.approx(0.5, rel=1e-14)

    def test_single_particle_quadratic(self):
        reg = build(power_law(2.0, 1), builtin("psi4_1d"), 0.1)
        s = ParticleState(0.0, np.array([[0.3]]), np.array([1.0]),
                          np.zeros(1), np.array([[0]]), 1.0, 1)
        assert energy_delta(s, reg) == 0.0

    def test_nonincreasing_along_flow(self):
        grid = discretize(PolyBump(p=2.0), 0.1, 1)
        reg = build(newtonian(1), builtin("psi4_1d"), 0.1**0.9)
        states = integrate(ParticleState.from_grid(grid), BlobMethod(reg),
                           IntegratorConfig(), 0.5,
                           sample_times=np.linspace(0.0, 0.5, 11))
        e = [energy_delta(s, reg) for s in states]
        slack = 1e-10 * (1 + abs(e[0]))
        assert all(b <= a + slack for a, b in zip(e, e[1:]))
        assert e[-1] < e[0]

    def test_permutation_and_translation_invariance(self):
        rng = np.random.default_rng(5)
        reg = build(newtonian(2), builtin("psi4_2d"), 0.2)
        n = 14
        pos = rng.uniform(-1, 1, size=(n, 2))
        w = rng.uniform(0.1, 1.0, size=n)
        idx = np.arange(n, dtype=np.int64).repeat(2).reshape(n, 2)
        s = ParticleState(0.0, pos, w, np.zeros(n), idx, 0.5, 2)
        perm = rng.permutation(n)
        sp = ParticleState(0.0, pos[perm], w[perm], np.zeros(n), idx[perm],
                           0.5, 2)
        st = ParticleState(0.0, pos + np.array([0.7, -0.3]), w, np.zeros(n),
                           idx, 0.5, 2)
        e = energy_delta(s, reg)
        assert energy_delta(sp, reg) == pytest.approx(e, rel=1e-12)
        assert energy_delta(st, reg) == pytest.approx(e, rel=1e-12)

    def test_dimension_mismatch(self):
        reg = build(power_law(2.0, 2), builtin("psi4_2d"), 0.1)
        s = ParticleState(0.0, np.array([[0.0]]), np.array([1.0]),
                          np.zeros(1), np.array([[0]]), 1.0, 1)
        with pytest.raises(Exception):
            energy_delta(s, reg)


def offset_states(c=0.25):
    grid = discretize(PolyBump(p=2.0), 0.25, 1)
    base = ParticleState.from_grid(grid)
    moved = ParticleState(0.0, grid.positions + c, grid.weights,
                          grid.rho0 + 0.0, grid.indices, grid.h, 1)
    return base, moved


class TestErrorFunctionals:
    def test_exact_match_is_zero(self):
        base, _ = offset_states()
        assert trajectory_error(base, base) == 0.0
        assert density_error(base, base, p=2) == 0.0

    def test_constant_offset_l1(self):
        base, moved = offset_states(0.25)
        expect = 0.25 * base.n * base.h
        assert trajectory_error(base, moved, p=1) == pytest.approx(
            expect, rel=1e-13)

    def test_array_exact_input(self):
        base, moved = offset_states(0.1)
        err = trajectory_error(base.positions, moved, p=math.inf)
        assert err == pytest.approx(0.1, rel=1e-13)
        derr = density_error(base.densities + 2.0, base, p=math.inf)
        assert derr == pytest.approx(2.0, rel=1e-13)

    def test_index_mismatch_raises(self):
        base, _ = offset_states()
        shifted = ParticleState(0.0, base.positions, base.weights,
                                base.densities, base.indices + 1, base.h, 1)
        with pytest.raises(IndexMismatchError):
            trajectory_error(base, shifted)
        with pytest.raises(IndexMismatchError):
            trajectory_error(base.positions[:-1], base)

    def test_dual2_dispatch_and_bound(self):
        base, moved = offset_states(0.05)
        d2 = trajectory_error(base, moved, norm="dual2")
        l2 = trajectory_error(base, moved, p=2)
        assert 0 < d2 <= l2
        with pytest.raises(ValidationError):
            trajectory_error(base, moved, norm="huh")

    def test_resolve_norm(self):
        assert resolve_norm("l1") == ("lp", 1.0)
        assert resolve_norm("linf") == ("lp", math.inf)
        assert resolve_norm("dual2") == ("dual2", 2.0)
        with pytest.raises(ValidationError):
            resolve_norm("l3")
