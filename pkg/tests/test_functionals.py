"""Conserved functionals, norms, gauge maps, and boosts."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from cmdnls.fields import ChiralField, make_grid, values
from cmdnls.functionals import (
    galilean_boost,
    gauge_inverse,
    gauge_transform,
    gauged_energy,
    energy,
    mass,
    mass_from_values,
    modulus_centroid,
    momentum,
    sobolev_norm,
    variance,
)
from cmdnls.solitons import residues_from_poles, sample_soliton

G = make_grid(128, 60.0)


def smooth_field(grid, amp=1.0 + 0.5j):
    """Coefficients xi * exp(-xi): vanish at xi = 0, so no boundary jump."""
    return ChiralField(grid, (amp * grid.xi * np.exp(-grid.xi)).astype(complex))


def coeff_fields(grid=G, max_amp=2.0):
    """Random decaying coefficient vectors on the module grid."""
    envelope = np.exp(-0.15 * np.arange(grid.K))
    return hnp.arrays(
        np.complex128,
        grid.K,
        elements=st.complex_numbers(max_magnitude=max_amp, allow_nan=False,
                                    allow_infinity=False),
    ).map(lambda c: ChiralField(grid, c * envelope))


# ---------------------------------------------------------------------------
# soliton values of the invariants


def test_ground_state_invariants(R):
    assert np.isclose(mass(R), 2 * np.pi, rtol=0, atol=1e-10)
    assert abs(energy(R)) < 1e-10
    assert abs(momentum(R)) < 1e-8


def test_two_soliton_mass_quantized(two_soliton):
    assert np.isclose(mass(two_soliton), 4 * np.pi, rtol=0, atol=1e-10)


def test_mass_closed_form(grid512):
    # u_hat = xi e^{-xi} (1 + i/2):  M = |1+i/2|^2/(2pi) * int xi^2 e^{-2xi}
    u = smooth_field(grid512)
    assert np.isclose(mass(u), 1.25 / (8 * np.pi), rtol=1e-6)


def test_mass_routes_agree(two_soliton):
    assert np.isclose(mass(two_soliton), mass_from_values(two_soliton),
                      rtol=1e-12)


@given(coeff_fields())
def test_energy_nonnegative(f):
    assert energy(f) >= -1e-12 * max(1.0, mass(f)) ** 2


@given(coeff_fields())
def test_mass_nonnegative(f):
    assert mass(f) >= 0.0


# ---------------------------------------------------------------------------
# Sobolev scale


def test_sobolev_zero_is_mass(two_soliton):
    assert sobolev_norm(two_soliton, 0.0) == pytest.approx(
        np.sqrt(mass(two_soliton)), rel=1e-14)


@given(coeff_fields(), st.floats(min_value=0.0, max_value=2.0),
       st.floats(min_value=0.0, max_value=2.0))
def test_sobolev_monotone_in_s(f, s1, s2):
    lo, hi = sorted((s1, s2))
    assert sobolev_norm(f, lo) <= sobolev_norm(f, hi) + 1e-12


def test_sobolev_rejects_negative_order(R):
    with pytest.raises(ValueError):
        sobolev_norm(R, -0.5)


# ---------------------------------------------------------------------------
# variance and its box flag


def test_variance_smooth_closed_form(grid512):
    # |u(x)|^2 = 1.25/(4 pi^2 (1+x^2)^2)  =>  int x^2|u|^2 = 1.25/(8 pi),
    # up to the O(1/L) box tail of the x^{-2} integrand.
    u = smooth_field(grid512)
    with pytest.warns(UserWarning):
        v = variance(u)
    assert not v.boundary_dominated
    assert np.isclose(v.value, 1.25 / (8 * np.pi), rtol=0.05)


def test_variance_flags_algebraic_tail(R):
    # x^2 |R|^2 -> 2 at the box ends: the value is all boundary.
    with pytest.warns(UserWarning, match="boundary-dominated"):
        v = variance(R)
    assert v.boundary_dominated


# ---------------------------------------------------------------------------
# gauge transform


def test_gauge_roundtrip(two_soliton):
    w = gauge_inverse(gauge_transform(two_soliton))
    assert np.allclose(w.coeffs, two_soliton.coeffs, rtol=0, atol=1e-12)


def test_gauge_preserves_modulus(R):
    from cmdnls.fields import real_values
    v = gauge_transform(R)
    assert np.allclose(np.abs(real_values(v)), np.abs(values(R)),
                       rtol=0, atol=1e-12)


def test_gauged_energy_matches_chiral(grid512):
    # The two energy computations share nothing but the field; agreement is
    # a strong functional identity check.  Needs u_hat(0+) = 0, otherwise
    # the gauge phase winding makes the periodic representative inexact.
    u = smooth_field(grid512)
    assert np.isclose(gauged_energy(u), energy(u), rtol=1e-7)


# ---------------------------------------------------------------------------
# Galilean boost


def test_boost_exact_on_jump_free_data(grid512):
    # With u_hat(0+) = 0 the spectrum shift is exact in every functional.
    u = smooth_field(grid512)
    eta = 8 * grid512.dxi
    bu = galilean_boost(u, eta)
    assert np.isclose(mass(bu), mass(u), rtol=0, atol=1e-11)
    assert np.isclose(momentum(bu) - momentum(u), eta * mass(u),
                      rtol=0, atol=1e-9)
    # and pointwise: e^{i eta x} times the original samples, up to the
    # eight tail modes the shift pushes past the cutoff (~1e-7 here)
    assert np.allclose(values(bu), np.exp(1j * eta * grid512.x) * values(u),
                       rtol=0, atol=1e-6)


def test_boost_mass_defect_closed_form(R512, grid512):
    # A boundary jump (u_hat(0+) != 0) cannot ride the shift for free: the
    # old half-weight node lands on an interior node at half amplitude, and
    # the mass drops by exactly dxi/(8 pi) |u_hat(0+)|^2.
    g = grid512
    eta = 8 * g.dxi
    bu = galilean_boost(R512, eta)
    pred = -(g.dxi / (8 * np.pi)) * abs(R512.coeffs[0]) ** 2
    assert np.isclose(mass(bu) - mass(R512), pred, rtol=0, atol=1e-11)


def test_boost_momentum_tracks_boosted_mass(R512, grid512):
    # The modulus is rendered faithfully, so the quartic term survives the
    # boost and P shifts by eta * (mass after the boost) to ~dxi^3.
    g = grid512
    for mult in (8, 16):
        eta = mult * g.dxi
        bu = galilean_boost(R512, eta)
        assert abs(momentum(bu) - momentum(R512) - eta * mass(bu)) < 1e-4


def test_boost_zero_is_identity(R):
    bu = galilean_boost(R, 0.0)
    assert np.array_equal(bu.coeffs, R.coeffs)
    assert bu.coeffs is not R.coeffs


def test_boost_argument_validation(R, grid):
    with pytest.raises(ValueError, match="not a multiple"):
        galilean_boost(R, 0.4 * grid.dxi)
    with pytest.raises(ValueError, match="negative"):
        galilean_boost(R, -grid.dxi)
    with pytest.raises(ValueError, match="cutoff"):
        galilean_boost(R, grid.K * grid.dxi)


# ---------------------------------------------------------------------------
# centroid tracking


def test_centroid_centered_soliton(R):
    assert modulus_centroid(R) == pytest.approx(0.0, abs=1e-10)


def test_centroid_translated_soliton(grid512):
    s = sample_soliton(grid512, residues_from_poles(np.array([7.0 - 1j])),
                       mode="lattice")
    assert modulus_centroid(s) == pytest.approx(7.0, abs=5e-3)


def test_centroid_tracks_across_box_seam(grid512):
    # A soliton parked at the box edge must not confuse the window wrap.
    s = sample_soliton(grid512,
                       residues_from_poles(np.array([-99.0 - 1j])),
                       mode="lattice")
    c = modulus_centroid(s)
    d = (c + 99.0 + grid512.L / 2) % grid512.L - grid512.L / 2
    assert abs(d) < 5e-2
