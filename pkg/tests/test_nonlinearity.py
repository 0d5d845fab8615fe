import math

import numpy as np
import pytest

from diriter import (
    BracketNotFound,
    Domain,
    GammaG,
    GradLipschitz,
    MeanCurvature,
    MissingNorm,
    NormConfig,
    admissible_K_threshold,
    analyze,
    contraction_bound,
    data_norms,
    evaluate_rhs,
    gradient,
    k_zero,
    psi,
    smallest_fixed_point,
)
from diriter.nonlinearity import curvature_coupling, gamma_g_combination, is_partial_bound

from conftest import random_smooth

DOM = Domain.rectangle(1.0, 1.0)


def fixed_point_closed_form(lam, K, h_alpha):
    disc = 1.0 - 4.0 * lam * lam * K * h_alpha
    if disc < 0:
        return None
    return (1.0 - math.sqrt(disc)) / (2.0 * lam * K)


# --- construction-time validation ------------------------------------------


def test_grad_lipschitz_validation(unit_grid_16):
    GradLipschitz(h=unit_grid_16.zeros(), K=0.1, m=2.0)  # default F fine
    GradLipschitz(h=unit_grid_16.zeros(), K=1.0, m=2.0, F=lambda s: np.sin(s))
    with pytest.raises(ValueError):
        GradLipschitz(h=unit_grid_16.zeros(), K=0.1, m=2.0, F=lambda s: s**2)
    with pytest.raises(ValueError):
        GradLipschitz(h=unit_grid_16.zeros(), K=-1.0, m=2.0)
    with pytest.raises(ValueError):
        GradLipschitz(h=unit_grid_16.zeros(), K=0.1, m=1.5)


def test_gamma_g_validation(unit_grid_16):
    z = unit_grid_16.zeros()
    GammaG(gamma=z, h=z, m=2.0, k=1.0)  # default g
    # linear g passes only where s^k dominates g' = 1
    GammaG(gamma=z, h=z, m=2.0, k=1.0, g=lambda s: s, gprime=lambda s: 1.0 + 0.0 * s,
           validation_range=(1.0, 2.0))
    with pytest.raises(ValueError):
        GammaG(gamma=z, h=z, m=2.0, k=1.0, g=lambda s: s, gprime=lambda s: 1.0 + 0.0 * s)
    with pytest.raises(ValueError):
        GammaG(gamma=z, h=z, m=2.0, k=1.0, g=lambda s: -s, gprime=lambda s: -1.0 + 0.0 * s)
    with pytest.raises(ValueError):
        GammaG(gamma=z, h=z, m=2.0, k=0.0)


# --- evaluate_rhs -----------------------------------------------------------


def test_rhs_grad_lipschitz_at_zero(unit_grid_16):
    h = unit_grid_16.field_from(lambda x, y: 1.0 + x * y)
    spec = GradLipschitz(h=h, K=0.3, m=2.0)
    u = unit_grid_16.zeros()
    f = evaluate_rhs(spec, u, gradient(u))
    assert np.array_equal(f.values, h.values)


def test_rhs_mean_curvature_flat(unit_grid_16):
    spec = MeanCurvature(H=unit_grid_16.constant(0.7), n=2)
    u = unit_grid_16.zeros()
    f = evaluate_rhs(spec, u, gradient(u))
    assert np.allclose(f.values, 2 * 0.7, atol=1e-12)


def test_rhs_gamma_g_nodewise():
    # gamma = 1, g(s) = s, m = 2, u = x(1-x): the symbolic expansion gives
    # f = x(1-x) (1-2x)^2 + h, exactly reproduced because the gradient
    # stencils are exact on quadratics
    grid = Domain.rectangle(1.0, 1.0)
    grid = __import__("diriter").build_grid(grid, 1.0 / 16)
    h = grid.field_from(lambda x, y: 0.5 + 0.0 * x)
    spec = GammaG(
        gamma=grid.constant(1.0),
        h=h,
        m=2.0,
        k=1.0,
        g=lambda s: s,
        gprime=lambda s: 1.0 + 0.0 * s,
        validation_range=(1.0, 2.0),
    )
    u = grid.field_from(lambda x, y: x * (1 - x))
    f = evaluate_rhs(spec, u, gradient(u))
    X, _ = grid.meshgrid()
    expected = X * (1 - X) * (1 - 2 * X) ** 2 + h.values
    assert np.max(np.abs(f.values - expected)) <= 1e-12


# --- psi ---------------------------------------------------------------------


def test_psi_constant_when_k_zero(unit_grid_16):
    spec = GradLipschitz(h=unit_grid_16.constant(1.0), K=0.0, m=2.0)
    for t in (0.0, 1.0, 10.0):
        assert psi(spec, DOM, {"h_alpha": 1.0}, t) == 1.0


def test_psi_grad_lipschitz_value(unit_grid_16):
    spec = GradLipschitz(h=unit_grid_16.constant(1.0), K=0.1, m=2.0)
    assert math.isclose(psi(spec, DOM, {"h_alpha": 1.0}, 3.0), 1.9, rel_tol=1e-12)


def test_psi_mean_curvature_value(unit_grid_16):
    spec = MeanCurvature(H=unit_grid_16.constant(0.01), n=2)
    # direct polynomial evaluation: (1+t^2) (H_a + 2 n^2 t^3 (1+t^2))
    t = 0.1
    expected = (1 + t * t) * (0.01 + 8 * t**3 * (1 + t * t))
    got = psi(spec, DOM, {"H_alpha": 0.01}, t)
    assert math.isclose(got, expected, rel_tol=1e-14)
    assert math.isclose(got, 0.0182608, abs_tol=1e-7)


def test_psi_strictly_increasing(unit_grid_16):
    specs = [
        GradLipschitz(h=unit_grid_16.constant(1.0), K=0.2, m=2.5),
        GammaG(gamma=unit_grid_16.constant(0.5), h=unit_grid_16.constant(1.0), m=2.0, k=1.5),
        MeanCurvature(H=unit_grid_16.constant(0.3), n=2),
    ]
    norms = {"h_alpha": 1.0, "gamma_alpha": 0.5, "H_alpha": 0.3}
    ts = np.linspace(0.0, 4.0, 200)
    for spec in specs:
        vals = [psi(spec, DOM, norms, t) for t in ts]
        assert all(b > a for a, b in zip(vals, vals[1:]))


def test_psi_missing_norm(unit_grid_16):
    spec = GradLipschitz(h=unit_grid_16.constant(1.0), K=0.1, m=2.0)
    with pytest.raises(MissingNorm):
        psi(spec, DOM, {}, 1.0)


# --- smallest fixed point ----------------------------------------------------


def test_fixed_point_k_zero_exact(unit_grid_16):
    spec = GradLipschitz(h=unit_grid_16.constant(1.0), K=0.0, m=2.0)
    for lam, h_alpha in [(1.0, 1.0), (2.0, 0.3), (0.5, 4.0)]:
        t = smallest_fixed_point(spec, DOM, {"h_alpha": h_alpha}, lam)
        assert math.isclose(t, lam * h_alpha, rel_tol=1e-13)


def test_fixed_point_matches_closed_form(unit_grid_16):
    spec = GradLipschitz(h=unit_grid_16.constant(1.0), K=0.1, m=2.0)
    t = smallest_fixed_point(spec, DOM, {"h_alpha": 1.0}, 1.0)
    assert abs(t - 1.1270166537925831) <= 1e-10
    assert abs(t - fixed_point_closed_form(1.0, 0.1, 1.0)) <= 1e-10


def test_fixed_point_none_when_discriminant_negative(unit_grid_16):
    spec = GradLipschitz(h=unit_grid_16.constant(1.0), K=1.0, m=2.0)
    assert smallest_fixed_point(spec, DOM, {"h_alpha": 1.0}, 1.0) is None


def test_fixed_point_residual_and_minimality(unit_grid_16):
    spec = GradLipschitz(h=unit_grid_16.constant(1.0), K=0.08, m=3.0)
    lam = 1.5
    norms = {"h_alpha": 0.7}
    t = smallest_fixed_point(spec, DOM, norms, lam)
    assert abs(lam * psi(spec, DOM, norms, t) - t) <= 1e-10 * max(1.0, t)
    for frac in np.linspace(0.05, 0.95, 19):
        tt = frac * t
        assert lam * psi(spec, DOM, norms, tt) > tt


def test_fixed_point_bracket_not_found(unit_grid_16):
    # window too small: the gap is still decreasing at t_max
    spec = GradLipschitz(h=unit_grid_16.constant(1.0), K=0.0, m=2.0)
    with pytest.raises(BracketNotFound):
        smallest_fixed_point(spec, DOM, {"h_alpha": 1.0}, 1.0, t_max=0.5)


def test_fixed_point_small_k_order(unit_grid_16):
    # t* / (lam h_alpha) -> 1 as K -> 0
    lam, h_alpha = 2.0, 1.5
    K = 1e-4 / (lam * lam * h_alpha)
    spec = GradLipschitz(h=unit_grid_16.constant(1.0), K=K, m=2.0)
    t = smallest_fixed_point(spec, DOM, {"h_alpha": h_alpha}, lam)
    assert abs(t / (lam * h_alpha) - 1.0) <= 0.05


def test_fixed_point_gamma_g_and_mce(unit_grid_16):
    gg = GammaG(gamma=unit_grid_16.constant(0.2), h=unit_grid_16.constant(1.0), m=2.0, k=1.0)
    t = smallest_fixed_point(gg, DOM, {"h_alpha": 1.0, "gamma_alpha": 0.2}, 0.5)
    assert t is not None and abs(0.5 * psi(gg, DOM, {"h_alpha": 1.0, "gamma_alpha": 0.2}, t) - t) <= 1e-10
    mce = MeanCurvature(H=unit_grid_16.constant(0.05), n=2)
    t2 = smallest_fixed_point(mce, DOM, {"H_alpha": 0.05}, 1.0)
    assert t2 is not None and t2 < 0.2


# --- contraction bound / thresholds ------------------------------------------


def test_contraction_bound_grad_lipschitz(unit_grid_16):
    spec = GradLipschitz(h=unit_grid_16.constant(1.0), K=0.1, m=2.0)
    assert math.isclose(contraction_bound(spec, 1.0, 0.5), 0.1, rel_tol=1e-14)
    spec0 = GradLipschitz(h=unit_grid_16.constant(1.0), K=0.0, m=2.0)
    assert contraction_bound(spec0, 3.0, 0.5) == 0.0


def test_contraction_bound_gamma_g(unit_grid_16):
    spec = GammaG(gamma=unit_grid_16.constant(0.2), h=unit_grid_16.constant(1.0), m=2.0, k=1.0)
    # B = max(kappa^2, kappa m/(k+1)) = max(0.25, 0.5) = 0.5
    assert math.isclose(gamma_g_combination(spec, 0.5), 0.5, rel_tol=1e-14)
    rho = contraction_bound(spec, 0.5, 0.5)
    assert math.isclose(rho, 0.2 * 0.5 * 0.125 * 0.5, rel_tol=1e-12)
    # slab form of B written in kappa = delta / sqrt(2) coincides
    delta = 0.9
    kap = delta / math.sqrt(2.0)
    assert math.isclose(
        gamma_g_combination(spec, kap),
        max(delta**2 / 2.0, spec.m * delta / ((spec.k + 1) * math.sqrt(2.0))),
        rel_tol=1e-12,
    )


def test_contraction_bound_mce_partial(unit_grid_16):
    spec = MeanCurvature(H=unit_grid_16.constant(0.3), n=2)
    rho = contraction_bound(spec, 0.4, 0.5)
    assert math.isclose(rho, math.sqrt(2.0) * 0.5 * 0.4 * 0.3, rel_tol=1e-12)
    assert is_partial_bound(spec)
    assert not is_partial_bound(GradLipschitz(h=unit_grid_16.zeros(), K=0.0))


def test_admissible_threshold_volumetric(unit_grid_16):
    spec = GradLipschitz(h=unit_grid_16.constant(1.0), K=0.1, m=2.0)
    got = admissible_K_threshold(spec, DOM, C=1.0, K0=10.0, kappa_kind="volumetric")
    assert math.isclose(got, 0.5 * math.sqrt(math.pi), rel_tol=1e-12)
    assert math.isclose(got, 0.886227, abs_tol=1e-6)


def test_admissible_threshold_slab(unit_grid_16):
    spec = GradLipschitz(h=unit_grid_16.constant(1.0), K=0.1, m=2.0)
    got = admissible_K_threshold(spec, DOM, C=1.0, K0=10.0, kappa_kind="slab")
    assert math.isclose(got, math.sqrt(2.0) / 2.0, rel_tol=1e-12)


def test_admissible_threshold_k0_dominates(unit_grid_16):
    spec = GradLipschitz(h=unit_grid_16.constant(1.0), K=0.1, m=2.0)
    assert admissible_K_threshold(spec, DOM, C=1.0, K0=0.01) == 0.01


def test_k_zero_matches_closed_form(unit_grid_16):
    # for m = 2 the fixed point reaches 2 lam h_alpha exactly when the
    # discriminant vanishes: K0 = 1 / (4 lam^2 h_alpha)
    spec = GradLipschitz(h=unit_grid_16.constant(1.0), K=0.1, m=2.0)
    for lam, h_alpha in [(1.0, 1.0), (2.0, 0.5)]:
        got = k_zero(spec, DOM, {"h_alpha": h_alpha}, lam)
        assert math.isclose(got, 1.0 / (4 * lam * lam * h_alpha), rel_tol=1e-9)


# --- pointwise bounds ---------------------------------------------------------


def test_mean_value_gradient_bound(unit_grid_16, rng):
    m = 2.0
    for _ in range(50):
        u = random_smooth(unit_grid_16, rng)
        v = random_smooth(unit_grid_16, rng)
        gu = gradient(u).magnitude()
        gv = gradient(v).magnitude()
        C = max(gu.max(), gv.max())
        lhs = np.abs(gu**m - gv**m)
        rhs = m * C ** (m - 1) * np.abs(gu - gv)
        assert np.all(lhs <= rhs * (1 + 1e-12) + 1e-12)


def test_sqrt_half_lipschitz(rng):
    s = rng.uniform(0.0, 50.0, size=1000)
    t = rng.uniform(0.0, 50.0, size=1000)
    assert np.all(np.abs(np.sqrt(1 + s) - np.sqrt(1 + t)) <= 0.5 * np.abs(s - t) + 1e-15)


def test_curvature_coupling_cubic(unit_grid_16, rng):
    u = random_smooth(unit_grid_16, rng)
    g = curvature_coupling(u, gradient(u))
    for c in (2.0, -3.0, 0.5):
        cu = unit_grid_16.field(c * u.values)
        gc = curvature_coupling(cu, gradient(cu))
        assert np.allclose(gc, c**3 * g, rtol=1e-10, atol=1e-12)


# --- analysis bundle ----------------------------------------------------------


def test_analyze_grad_lipschitz(unit_grid_16):
    spec = GradLipschitz(h=unit_grid_16.constant(1.0), K=0.05, m=2.0)
    norms = data_norms(spec, NormConfig(alpha=0.5))
    assert math.isclose(norms["h_alpha"], 1.0, rel_tol=1e-12)  # constant: sup 1, seminorm 0
    an = analyze(spec, DOM, norms, lam=2.0, kappa_kind="min")
    assert an.C is not None and an.rho is not None
    assert an.rho == contraction_bound(spec, an.C, an.kappa)
    assert an.K_threshold is not None and not an.partial
    assert math.isclose(an.kappa, (1 / math.pi) ** 0.5, rel_tol=1e-12)


def test_analyze_mce_partial_flag(unit_grid_16):
    spec = MeanCurvature(H=unit_grid_16.constant(0.05), n=2)
    norms = data_norms(spec, NormConfig(alpha=0.5))
    an = analyze(spec, DOM, norms, lam=1.0)
    assert an.partial
