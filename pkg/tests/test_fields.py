import numpy as np
import pytest
from hypothesis import given, strategies as st

from cmdnls.fields import (
    ChiralField,
    FrequencyGrid,
    chiral_from_values,
    chiral_product,
    conj_product,
    density_coeffs,
    embed,
    fourier_multiplier,
    hilbert_transform,
    inner,
    make_grid,
    norm,
    project_plus,
    real_values,
    realline_from_values,
    values,
)

G = make_grid(64, 50.0)


def random_field(seed, grid=G, decay=1.0):
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(grid.K) + 1j * rng.standard_normal(grid.K)
    return ChiralField(grid, c * np.exp(-decay * grid.xi))


# ---------------------------------------------------------------------------
# grid


def test_grid_geometry():
    g = make_grid(128, 40.0)
    assert g.dxi == pytest.approx(2 * np.pi / 40.0)
    assert len(g.xi) == 128 and g.xi[0] == 0.0
    assert len(g.x) == 256
    assert g.x[0] == pytest.approx(-20.0)
    np.testing.assert_allclose(np.diff(g.x), 40.0 / 256)
    assert g.weights[0] == 0.5 and g.weights[-1] == 0.5
    assert np.all(g.weights[1:-1] == 1.0)


def test_grid_validation():
    with pytest.raises(ValueError):
        make_grid(4, 50.0)
    with pytest.raises(ValueError):
        make_grid(64, -1.0)


# ---------------------------------------------------------------------------
# transforms


@given(st.integers(0, 2**32 - 1))
def test_values_roundtrip(seed):
    f = random_field(seed)
    back = chiral_from_values(G, values(f))
    np.testing.assert_allclose(back.coeffs, f.coeffs, atol=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_embed_project_roundtrip(seed):
    f = random_field(seed)
    g = project_plus(embed(f))
    np.testing.assert_allclose(g.coeffs, f.coeffs, atol=0, rtol=0)


def test_real_values_of_real_data():
    rng = np.random.default_rng(0)
    samples = rng.standard_normal(2 * G.K)
    f = realline_from_values(G, samples)
    np.testing.assert_allclose(real_values(f), samples, atol=1e-12)


def test_closed_form_transform_pair():
    # u(x) = sqrt(2)/(x + i) has u_hat(xi) = -2 pi i sqrt(2) e^{-xi} on
    # xi >= 0.  On the box, values() realizes the L-periodization of u;
    # the jump of u_hat at xi = 0 enters at its midpoint (Poisson
    # summation), which shows up as the constant dxi*u_hat(0+)/(4 pi).
    g = make_grid(512, 200.0)
    u = ChiralField(g, -2j * np.pi * np.sqrt(2) * np.exp(-g.xi))
    period_sum = np.zeros(2 * g.K, dtype=complex)
    for n in range(-300, 301):
        period_sum += np.sqrt(2) / (g.x + n * g.L + 1j)
    offset = g.dxi * u.coeffs[0] / (4 * np.pi)
    assert np.max(np.abs(values(u) - period_sum - offset)) < 1e-4


# ---------------------------------------------------------------------------
# Hardy-space operators


@given(st.integers(0, 2**32 - 1))
def test_szego_idempotent_and_selfadjoint(seed):
    rng = np.random.default_rng(seed)
    w = realline_from_values(G, rng.standard_normal(2 * G.K))
    p1 = project_plus(w)
    p2 = project_plus(embed(p1))
    np.testing.assert_allclose(p2.coeffs, p1.coeffs, atol=1e-13)

    v = realline_from_values(G, rng.standard_normal(2 * G.K))
    dx = G.L / (2 * G.K)
    lhs = np.sum(real_values(embed(project_plus(w))) * np.conj(real_values(v))) * dx
    rhs = np.sum(real_values(w) * np.conj(real_values(embed(project_plus(v))))) * dx
    assert abs(lhs - rhs) < 1e-10 * (1 + abs(lhs))


@given(st.integers(0, 2**32 - 1))
def test_hilbert_involution(seed):
    rng = np.random.default_rng(seed)
    w = realline_from_values(G, rng.standard_normal(2 * G.K))
    hh = hilbert_transform(hilbert_transform(w))
    expect = w.coeffs.copy()
    expect[G.K] = 0.0  # the mean is annihilated (principal value)
    np.testing.assert_allclose(hh.coeffs, -expect, atol=1e-12)


def test_szego_from_hilbert():
    # Pi_+ = (1 + iH)/2 mode by mode away from xi = 0 (the boundary mode
    # belongs half to each side and the projector keeps it whole)
    rng = np.random.default_rng(3)
    w = realline_from_values(G, rng.standard_normal(2 * G.K))
    combo = 0.5 * (w.coeffs + 1j * hilbert_transform(w).coeffs)
    proj = embed(project_plus(w)).coeffs
    np.testing.assert_allclose(proj[G.K + 1 :], combo[G.K + 1 :], atol=1e-12)
    np.testing.assert_allclose(combo[1 : G.K], 0.0, atol=1e-12)
    assert proj[G.K] == pytest.approx(2 * combo[G.K])


def test_fourier_multiplier():
    f = random_field(7)
    g = fourier_multiplier(f, lambda xi: xi**2)
    np.testing.assert_allclose(g.coeffs, G.xi**2 * f.coeffs)


# ---------------------------------------------------------------------------
# quadrature


@given(st.integers(0, 2**32 - 1))
def test_parseval(seed):
    from cmdnls.functionals import mass, mass_from_values

    f = random_field(seed, decay=2.0)
    assert mass_from_values(f) == pytest.approx(mass(f), rel=1e-12)


def test_inner_norm_consistency():
    f = random_field(1)
    assert norm(G, f.coeffs) == pytest.approx(
        np.sqrt(inner(G, f.coeffs, f.coeffs).real)
    )
    assert abs(inner(G, f.coeffs, f.coeffs).imag) < 1e-14


# ---------------------------------------------------------------------------
# products


def test_chiral_product_closed_form():
    # e^{-xi} * e^{-xi} -> xi e^{-xi} / (2 pi), the half-line convolution
    g = make_grid(1024, 400.0)
    c = np.exp(-g.xi)
    p = chiral_product(g, c, c)
    target = g.xi * np.exp(-g.xi) / (2 * np.pi)
    target[0] = 0.0
    assert np.max(np.abs(p - target)) < 2 * g.dxi**2


@given(st.integers(0, 2**32 - 1))
def test_chiral_product_symmetric_bilinear(seed):
    f = random_field(seed).coeffs
    g = random_field(seed + 1).coeffs
    h = random_field(seed + 2).coeffs
    np.testing.assert_allclose(
        chiral_product(G, f, g), chiral_product(G, g, f), atol=1e-12
    )
    np.testing.assert_allclose(
        chiral_product(G, f, g + 2.5 * h),
        chiral_product(G, f, g) + 2.5 * chiral_product(G, f, h),
        atol=1e-11,
    )


@given(st.integers(0, 2**32 - 1))
def test_chiral_product_zero_mode(seed):
    f = random_field(seed).coeffs
    g = random_field(seed + 9).coeffs
    assert chiral_product(G, f, g)[0] == 0.0


@given(st.integers(0, 2**32 - 1))
def test_density_zero_mode_is_mass(seed):
    # the xi -> 0+ coefficient of |u|^2 is int |u|^2 dx itself
    f = random_field(seed, decay=2.0)
    d = density_coeffs(G, f.coeffs)
    expect = (G.dxi / (2 * np.pi)) * np.sum(G.weights * np.abs(f.coeffs) ** 2)
    assert d[0] == pytest.approx(expect, rel=1e-8)
    assert abs(d[0].imag) < 1e-14 * (1 + abs(d[0]))


def test_conj_product_matches_loop():
    # independent O(K^2) evaluation of the correlation sum
    g = make_grid(32, 20.0)
    rng = np.random.default_rng(5)
    u = (rng.standard_normal(32) + 1j * rng.standard_normal(32)) * np.exp(-g.xi)
    f = (rng.standard_normal(32) + 1j * rng.standard_normal(32)) * np.exp(-g.xi)
    us = u.copy()
    us[0] *= 0.5
    direct = np.zeros(32, dtype=complex)
    for k in range(32):
        for m in range(32):
            if 0 <= m - k < 32:
                direct[k] += f[m] * np.conj(us[m - k])
    direct *= g.dxi / (2 * np.pi)
    np.testing.assert_allclose(conj_product(g, u, f), direct, atol=1e-12)
