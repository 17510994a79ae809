import numpy as np
import pytest

import tfhomog as tf
from tfhomog.analysis import layered_cell_oracle, voigt_reuss_bounds
from tfhomog.cell import effective_tensor, solve_cell

HARMONIC_STEP = 380.0 / 29.0   # 2 / (1/19 + 1/10)
ARITH_STEP = 14.5


def test_constant_field_zero_correctors():
    for c in (1.0, 3.7):
        sol = solve_cell(tf.constant(c), 16)
        assert np.abs(sol.chi).max() <= 1e-10
        assert np.allclose(sol.kappa_star, c * np.eye(2), atol=1e-10)


def test_layered_step_effective_tensor():
    sol = solve_cell(tf.layered("step"), 64)
    assert sol.kappa_star[0, 0] == pytest.approx(HARMONIC_STEP, rel=1e-8)
    assert sol.kappa_star[1, 1] == pytest.approx(ARITH_STEP, rel=1e-10)
    assert abs(sol.kappa_star[0, 1]) <= 1e-10
    # chi_2 vanishes and chi_1 depends on y1 only
    assert np.abs(sol.chi[1]).max() <= 1e-10
    n = sol.cell_grid.n
    chi1 = sol.chi[0].reshape(n + 1, n + 1)
    assert np.abs(chi1 - chi1[0]).max() <= 1e-9


def test_layered_step_against_1d_oracle():
    k_along, k_across = layered_cell_oracle(lambda y: np.where(y < 0.5, 19.0, 10.0))
    assert k_along == pytest.approx(HARMONIC_STEP, rel=1e-12)
    assert k_across == pytest.approx(ARITH_STEP, rel=1e-12)
    sol = solve_cell(tf.layered("step"), 64)
    assert sol.kappa_star[0, 0] == pytest.approx(k_along, rel=1e-8)
    assert sol.kappa_star[1, 1] == pytest.approx(k_across, rel=1e-8)


def test_layered_sine_analytic_harmonic_mean():
    # harmonic mean of 10 + 9 sin(2 pi y) is sqrt(100 - 81); the cell solve
    # converges at second order (measured rel. error 4.3e-4 at n = 128)
    sol = solve_cell(tf.layered("sine"), 128)
    assert sol.kappa_star[0, 0] == pytest.approx(np.sqrt(19.0), rel=1e-3)
    assert sol.kappa_star[1, 1] == pytest.approx(10.0, rel=1e-6)
    oracle = layered_cell_oracle(lambda y: 10.0 + 9.0 * np.sin(2 * np.pi * y))
    assert oracle[0] == pytest.approx(np.sqrt(19.0), rel=1e-6)


def test_zero_mean(cell_solutions_64):
    for sol in cell_solutions_64.values():
        assert np.abs(sol.means).max() <= 1e-10


def test_gradient_bound_lemma(cell_solutions_64):
    # |grad chi_j|_{L2(Y)} <= mu^{-1} |kappa|_{L2(Y)}
    for fid, sol in cell_solutions_64.items():
        field = tf.parse_field(fid)
        y = (np.arange(512) + 0.5) / 512
        Y1, Y2 = np.meshgrid(y, y, indexing="ij")
        kappa_l2 = np.sqrt(np.mean(field(Y1, Y2) ** 2))
        bound = kappa_l2 / field.mu
        assert sol.h1_seminorms.max() <= bound


def test_kappa_star_symmetric_spd_in_bracket(cell_solutions_64):
    for fid, sol in cell_solutions_64.items():
        ks = sol.kappa_star
        assert abs(ks[0, 1] - ks[1, 0]) <= 1e-12
        eigs = np.linalg.eigvalsh(ks)
        assert eigs.min() > 0
        lo, hi = voigt_reuss_bounds(tf.parse_field(fid))
        assert eigs.min() >= lo - 1e-6
        assert eigs.max() <= hi + 1e-6


def test_axis_swap_symmetry(cell_solutions_64):
    # all four benchmark fields are symmetric under (y1,y2) -> (y2,y1)
    for sol in cell_solutions_64.values():
        assert sol.kappa_star[0, 0] == pytest.approx(sol.kappa_star[1, 1], abs=1e-8)


def test_off_diagonal_small(cell_solutions_64):
    for sol in cell_solutions_64.values():
        assert abs(sol.kappa_star[0, 1]) < sol.kappa_star[0, 0]


@pytest.mark.parametrize("fid", ["smooth-low", "smooth-high"])
def test_mesh_convergence_of_kappa_star_smooth(fid):
    # smooth coefficients: clean O(h^2), each Cauchy gap shrinks by ~4x
    vals = {n: solve_cell(tf.parse_field(fid), n).kappa_star[0, 0]
            for n in (32, 64, 128)}
    d1 = abs(vals[32] - vals[64])
    d2 = abs(vals[64] - vals[128])
    assert d2 <= d1 / 2.0


@pytest.mark.parametrize("fid", ["piecewise-low", "piecewise-high"])
def test_mesh_convergence_of_kappa_star_piecewise(fid):
    # the jump lines at 1/5 and 4/5 never align with power-of-two meshes, so
    # the Cauchy gaps |k*(n) - k*(2n)| oscillate (measured ratios 0.09..42);
    # the sequence still settles: the final gap is well below the largest one
    vals = {n: solve_cell(tf.parse_field(fid), n).kappa_star[0, 0]
            for n in (32, 64, 128, 256)}
    gaps = [abs(vals[n] - vals[2 * n]) for n in (32, 64, 128)]
    assert gaps[-1] <= 0.5 * max(gaps)


def test_linfty_bounded_across_refinement():
    field = tf.piecewise_high()
    m32 = np.abs(solve_cell(field, 32).chi).max()
    m64 = np.abs(solve_cell(field, 64).chi).max()
    assert m64 <= 1.5 * max(m32, 1e-3)


def test_effective_tensor_public_op(cell_solutions_64):
    sol = cell_solutions_64["smooth-low"]
    ks = effective_tensor(sol, tf.smooth_low())
    assert np.allclose(ks, sol.kappa_star, atol=1e-12)


def test_chi_interpolation_periodic_and_matches_nodes():
    sol = solve_cell(tf.smooth_low(), 32)
    g = sol.cell_grid
    # at nodes the interpolant reproduces nodal values
    vals = sol.chi_at(0, g.node_x, g.node_y)
    assert np.allclose(vals, sol.chi[0], atol=1e-12)
    # periodic continuation
    pts = np.array([0.3, 1.3, -0.7])
    assert np.allclose(sol.chi_at(0, pts, np.full(3, 0.4)),
                       np.full(3, sol.chi_at(0, 0.3, 0.4)), atol=1e-12)


def test_chi_gradient_interpolation_layered_sine():
    # chi_1'(y1) = harmonic_mean / kappa(y1) - 1 for a layered medium; the
    # Q1 derivative is first-order accurate pointwise (error ~ h |chi''|/2,
    # with |chi''| up to ~25 near the kappa minimum at h = 1/128)
    sol = solve_cell(tf.layered("sine"), 128)
    kh = sol.kappa_star[0, 0]
    y = np.array([0.11, 0.33, 0.61, 0.87])
    g1, g2 = sol.chi_grad_at(0, y, np.full_like(y, 0.4))
    exact = kh / (10.0 + 9.0 * np.sin(2 * np.pi * y)) - 1.0
    assert np.allclose(g1, exact, atol=0.1)
    assert np.abs(g2).max() <= 1e-8
    # at element midpoints the derivative superconverges
    mids = (np.arange(10) + 0.5) / 128.0
    gm, _ = sol.chi_grad_at(0, mids, np.full_like(mids, 0.4))
    exact_m = kh / (10.0 + 9.0 * np.sin(2 * np.pi * mids)) - 1.0
    assert np.allclose(gm, exact_m, atol=2e-3)


def test_chi_gradient_matches_finite_difference_of_interpolant():
    sol = solve_cell(tf.smooth_high(), 32)
    rng = np.random.default_rng(5)
    x1, x2 = rng.uniform(0.01, 0.95, 50), rng.uniform(0.01, 0.95, 50)
    g1, g2 = sol.chi_grad_at(0, x1, x2)
    d = 1e-7
    fd1 = (sol.chi_at(0, x1 + d, x2) - sol.chi_at(0, x1 - d, x2)) / (2 * d)
    fd2 = (sol.chi_at(0, x1, x2 + d) - sol.chi_at(0, x1, x2 - d)) / (2 * d)
    assert np.allclose(g1, fd1, atol=1e-5)
    assert np.allclose(g2, fd2, atol=1e-5)


def test_chi_interpolation_insensitive_to_cell_refinement():
    # doubling n_cell barely moves the interpolated corrector values
    f = tf.smooth_low()
    s64 = solve_cell(f, 64)
    s128 = solve_cell(f, 128)
    rng = np.random.default_rng(1)
    x1, x2 = rng.uniform(0, 1, 200), rng.uniform(0, 1, 200)
    a = s64.chi_at(0, x1, x2)
    b = s128.chi_at(0, x1, x2)
    scale = max(np.abs(b).max(), 1e-12)
    assert np.abs(a - b).max() <= 0.02 * scale


def test_solve_cell_rejects_bad_mesh():
    with pytest.raises(ValueError):
        solve_cell(tf.smooth_low(), 24)
