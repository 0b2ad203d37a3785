"""Discrete chiral fields on a periodic box and their spectral calculus.

A function with nonnegative-frequency support is stored as K complex
coefficients c_k ~ u_hat(xi_k) on the uniform frequency lattice
xi_k = 2*pi*k/L, using the transform pair

    u_hat(xi) = int e^{-i xi x} u(x) dx,
    u(x)      = (1/2pi) int_0^inf e^{i xi x} u_hat(xi) dxi.

All quadratic functionals discretize the half-line frequency integral
with trapezoid weights (1/2, 1, ..., 1, 1/2).  The product rules below
halve the boundary modes of their inputs in the same pattern, which is
what makes the quadratic invariants of the flow exact in the discrete
setting rather than merely O(dxi^2): the pairing <star(xi*m, u), u>
becomes exactly real, so the mass and the boundary coefficient u_hat(0+)
are conserved by the semi-discrete equation to round-off.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "FrequencyGrid",
    "ChiralField",
    "RealLineField",
    "make_grid",
    "values",
    "chiral_from_values",
    "real_values",
    "realline_from_values",
    "embed",
    "project_plus",
    "fourier_multiplier",
    "hilbert_transform",
    "inner",
    "norm",
    "chiral_product",
    "conj_product",
    "density_coeffs",
]


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform lattice of K nonnegative frequencies on a box of length L.

    The spatial companion grid has 2K points x_m = -L/2 + m*L/(2K); the
    doubled count is the natural size for pointwise products of two
    K-mode fields.
    """

    K: int
    L: float

    def __post_init__(self):
        if self.K < 8:
            raise ValueError(f"need at least 8 modes, got K={self.K}")
        if not self.L > 0:
            raise ValueError(f"box length must be positive, got L={self.L}")

    @property
    def dxi(self) -> float:
        return 2 * np.pi / self.L

    @property
    def xi(self) -> np.ndarray:
        return self.dxi * np.arange(self.K)

    @property
    def weights(self) -> np.ndarray:
        w = np.ones(self.K)
        w[0] = 0.5
        w[-1] = 0.5
        return w

    @property
    def x(self) -> np.ndarray:
        return -self.L / 2 + np.arange(2 * self.K) * self.L / (2 * self.K)


def make_grid(K: int, L: float) -> FrequencyGrid:
    return FrequencyGrid(K, L)


@dataclass
class ChiralField:
    """Field with spectrum supported on xi >= 0 (structurally: nothing
    else is stored, so the positivity projection is the identity)."""

    grid: FrequencyGrid
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != (self.grid.K,):
            raise ValueError(
                f"expected {self.grid.K} coefficients, got {self.coeffs.shape}"
            )
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("non-finite coefficient")

    def copy(self) -> "ChiralField":
        return ChiralField(self.grid, self.coeffs.copy())

    @classmethod
    def zero(cls, grid: FrequencyGrid) -> "ChiralField":
        return cls(grid, np.zeros(grid.K, dtype=complex))


@dataclass
class RealLineField:
    """Two-sided field: 2K coefficients for frequencies k = -K .. K-1,
    stored in ascending-frequency order."""

    grid: FrequencyGrid
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != (2 * self.grid.K,):
            raise ValueError(
                f"expected {2 * self.grid.K} coefficients, got {self.coeffs.shape}"
            )
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("non-finite coefficient")

    def is_real_valued(self, tol: float = 1e-10) -> bool:
        """Conjugation symmetry c(-k) == conj(c(k)) of the stored modes.

        The -K mode has no +K partner on this lattice and is compared
        against its own conjugate (i.e. required to be real).
        """
        K = self.grid.K
        c = self.coeffs
        scale = max(np.max(np.abs(c)), 1e-300)
        pos = c[K + 1:]                    # k = 1 .. K-1
        neg = c[K - 1:0:-1]                # k = -1 .. -(K-1)
        dev = np.max(np.abs(neg - np.conj(pos))) if len(pos) else 0.0
        dev = max(dev, abs(c[K].imag), abs(c[0].imag))
        return dev <= tol * scale


# ---------------------------------------------------------------------------
# transforms between coefficients and point values


def values(f: ChiralField) -> np.ndarray:
    """Samples of the field on the 2K spatial points.

    The (-1)^k phase accounts for the grid starting at x = -L/2.
    """
    g = f.grid
    ph = (-1.0) ** np.arange(g.K)
    cc = np.zeros(2 * g.K, dtype=complex)
    cc[: g.K] = f.coeffs * ph
    return np.fft.ifft(cc) * (2 * g.K) * (g.dxi / (2 * np.pi))


def chiral_from_values(grid: FrequencyGrid, samples: np.ndarray) -> ChiralField:
    """Inverse of :func:`values` followed by dropping negative modes."""
    raw = np.fft.fft(np.asarray(samples, dtype=complex)) / (2 * grid.K)
    c = raw[: grid.K] * ((-1.0) ** np.arange(grid.K)) * (2 * np.pi / grid.dxi)
    return ChiralField(grid, c)


def real_values(f: RealLineField) -> np.ndarray:
    """Samples of a two-sided field on the 2K spatial points."""
    g = f.grid
    k = np.arange(-g.K, g.K)
    phased = f.coeffs * ((-1.0) ** k)          # e^{i k dxi (-L/2)} start phase
    afft = np.concatenate([phased[g.K:], phased[: g.K]])
    return np.fft.ifft(afft) * (2 * g.K) * (g.dxi / (2 * np.pi))


def realline_from_values(grid: FrequencyGrid, samples: np.ndarray) -> RealLineField:
    """Two-sided spectrum of 2K point samples (inverse of real_values)."""
    K = grid.K
    raw = np.fft.fft(np.asarray(samples, dtype=complex)) / (2 * K)
    raw *= 2 * np.pi / grid.dxi
    phased = np.concatenate([raw[K:], raw[:K]])   # ascending k = -K..K-1
    k = np.arange(-K, K)
    return RealLineField(grid, phased * ((-1.0) ** k))


def embed(f: ChiralField) -> RealLineField:
    """View a chiral field as a two-sided field with empty negative modes."""
    c = np.zeros(2 * f.grid.K, dtype=complex)
    c[f.grid.K:] = f.coeffs
    return RealLineField(f.grid, c)


def project_plus(f: RealLineField) -> ChiralField:
    """Restriction to nonnegative frequencies (the positivity projector)."""
    return ChiralField(f.grid, f.coeffs[f.grid.K:].copy())


def fourier_multiplier(f, symbol: Callable[[np.ndarray], np.ndarray]):
    """Apply a frequency multiplier m(xi) coefficient-wise."""
    if isinstance(f, ChiralField):
        m = np.asarray(symbol(f.grid.xi), dtype=complex)
        if not np.all(np.isfinite(m)):
            raise ValueError("multiplier symbol not finite on the grid")
        return ChiralField(f.grid, m * f.coeffs)
    g = f.grid
    k = g.dxi * np.arange(-g.K, g.K)
    m = np.asarray(symbol(k), dtype=complex)
    if not np.all(np.isfinite(m)):
        raise ValueError("multiplier symbol not finite on the grid")
    return RealLineField(g, m * f.coeffs)


def hilbert_transform(f: RealLineField) -> RealLineField:
    """Multiplier -i*sgn(xi); the zero mode is annihilated (principal value)."""
    g = f.grid
    k = np.arange(-g.K, g.K)
    return RealLineField(g, -1j * np.sign(k) * f.coeffs)


# ---------------------------------------------------------------------------
# the weighted calculus on coefficient arrays (internal workhorses)


def inner(grid: FrequencyGrid, f: np.ndarray, g: np.ndarray) -> complex:
    """Trapezoid L^2 pairing (1/2pi) int_0^inf f conj(g) dxi."""
    return (grid.dxi / (2 * np.pi)) * np.sum(grid.weights * f * np.conj(g))


def norm(grid: FrequencyGrid, f: np.ndarray) -> float:
    return float(np.sqrt(max(inner(grid, f, f).real, 0.0)))


def chiral_product(grid: FrequencyGrid, f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Coefficients of the product F*G of two chiral fields, on xi >= 0.

    Both inputs' boundary modes are halved (they carry weight 1/2 in
    every half-line functional) and the output boundary mode is zeroed,
    which keeps u_hat(0+) invariant under the nonlinear flow exactly.
    """
    K = len(f)
    fs = f.copy()
    fs[0] *= 0.5
    gs = g.copy()
    gs[0] *= 0.5
    out = np.fft.ifft(np.fft.fft(fs, 2 * K) * np.fft.fft(gs, 2 * K))[:K]
    out *= grid.dxi / (2 * np.pi)
    out[0] = 0.0
    return out


def conj_product(grid: FrequencyGrid, u: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Coefficients of the nonnegative-frequency part of conj(U)*F.

    The conjugated factor's boundary mode is halved; this is the
    matrix-free action of the conjugate-symbol (correlation) operator.
    """
    K = len(u)
    us = u.copy()
    us[0] *= 0.5
    out = np.fft.ifft(np.fft.fft(f, 2 * K) * np.conj(np.fft.fft(us, 2 * K)))[:K]
    return out * (grid.dxi / (2 * np.pi))


def density_coeffs(grid: FrequencyGrid, u: np.ndarray) -> np.ndarray:
    """Nonnegative-frequency coefficients of |u|^2."""
    return conj_product(grid, u, u)
