"""Dense realization of the Lax operators in the positive-frequency basis.

The operator L = D - T_u T_u* becomes, on the frequency lattice, the
diagonal of xi minus the product of two triangular matrices built from
u's coefficients with the same boundary-mode halving as the quadratic
calculus (see fields.chiral_product / conj_product).  Row 0 of the
product matrix is zeroed: it represents the half-line boundary, where
the product rule deposits nothing.

The matrix is exactly Hermitian on the subblock that excludes mode 0;
the column-0 edge carries a structural defect of order dxi (the price
of the exactly-conserved boundary coefficient).  The zero eigenvector
is recovered separately through the boundary row, so nothing is lost:
the full bound-state spectrum, including the exact kernel state, comes
out of the subblock solve plus one linear solve.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fields import (
    ChiralField,
    FrequencyGrid,
    chiral_product,
    conj_product,
    inner,
    norm,
    values,
)

__all__ = [
    "LaxMatrix",
    "EigenSystem",
    "SpectralData",
    "toeplitz_from_symbol",
    "star_product_matrix",
    "conj_product_matrix",
    "assemble_lax",
    "assemble_B",
    "assemble_B_tilde",
    "lax_apply",
    "bound_states",
    "conserved_hierarchy",
    "spectral_data_from_potential",
    "lax_equation_residual",
    "operator_bound_checks",
]

# five-point extrapolation weights used to fill the boundary component of
# the kernel eigenvector (the boundary row itself is structural zero)
_EXTRAP5 = np.array([5.0, -10.0, 10.0, -5.0, 1.0])


@dataclass
class LaxMatrix:
    grid: FrequencyGrid
    u: np.ndarray
    entries: np.ndarray

    def hermiticity_defect(self) -> float:
        """Max deviation from Hermitian symmetry off the boundary mode."""
        A = self.entries[1:, 1:]
        return float(np.max(np.abs(A - A.conj().T)))


@dataclass
class EigenSystem:
    """Bound states of a Lax matrix: eigenvalues sorted ascending,
    columns of `vectors` normalized and phase-aligned so that
    <u, psi_j> = sqrt(2 pi) is real positive."""

    eigenvalues: np.ndarray
    vectors: np.ndarray
    overlaps: np.ndarray
    bound_state_count: int


@dataclass
class SpectralData:
    """Scattering-side description of an N-soliton potential."""

    phi: float
    rho: float
    lam: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        self.lam = np.asarray(self.lam, dtype=float)
        self.gamma = np.asarray(self.gamma, dtype=float)
        if self.rho <= 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if abs(self.lam[0]) > 1e-6:
            raise ValueError("leading eigenvalue must vanish")
        self.lam[0] = 0.0
        self.phi = float(self.phi % (2 * np.pi))
        if len(self.lam) != len(self.gamma):
            raise ValueError("lam and gamma must pair up")
        if len(self.lam) > 1:
            gaps = np.abs(self.lam[:, None] - self.lam[None, :])
            if np.min(gaps[~np.eye(len(self.lam), dtype=bool)]) == 0:
                raise ValueError("eigenvalues must be pairwise distinct")

    @property
    def N(self) -> int:
        return len(self.lam)


# ---------------------------------------------------------------------------
# matrix builders


def toeplitz_from_symbol(u: ChiralField) -> np.ndarray:
    """Lower-triangular Toeplitz matrix T_jk = (dxi/2pi) u_hat(xi_j - xi_k).

    This is the plain product matrix (no boundary halving); it matches
    the spatial product of two fields projected back to xi >= 0.  The
    Lax assembly uses the boundary-weighted variants instead.
    """
    c = u.coeffs
    K = u.grid.K
    T = np.zeros((K, K), dtype=complex)
    for n in range(K):
        T[n, : n + 1] = c[n::-1]
    return T * (u.grid.dxi / (2 * np.pi))


def star_product_matrix(grid: FrequencyGrid, c: np.ndarray) -> np.ndarray:
    """Matrix of f -> chiral_product(c, f): convolution with both end
    coefficients halved and the boundary row zeroed."""
    K = grid.K
    T = np.zeros((K, K), dtype=complex)
    for n in range(1, K):
        T[n, : n + 1] = c[n::-1]
        T[n, 0] *= 0.5
        T[n, n] *= 0.5
    return T * (grid.dxi / (2 * np.pi))


def conj_product_matrix(grid: FrequencyGrid, c: np.ndarray) -> np.ndarray:
    """Matrix of f -> conj_product(c, f): correlation with the halved
    diagonal carrying the conjugated boundary mode."""
    K = grid.K
    Tb = np.zeros((K, K), dtype=complex)
    cb = np.conj(c)
    for n in range(K):
        Tb[n, n:] = cb[: K - n]
        Tb[n, n] *= 0.5
    return Tb * (grid.dxi / (2 * np.pi))


def assemble_lax(u: ChiralField) -> LaxMatrix:
    g = u.grid
    ent = np.diag(g.xi).astype(complex)
    ent -= star_product_matrix(g, u.coeffs) @ conj_product_matrix(g, u.coeffs)
    return LaxMatrix(g, u.coeffs.copy(), ent)


def assemble_B(u: ChiralField) -> np.ndarray:
    """Skew part of the Lax pair: B = T_u C_{Du} - T_{Du} C_u + i (T_u C_u)^2."""
    g = u.grid
    c = u.coeffs
    dc = 1j * g.xi * c
    Ts = star_product_matrix(g, c)
    Cs = conj_product_matrix(g, c)
    TC = Ts @ Cs
    return Ts @ conj_product_matrix(g, dc) - star_product_matrix(g, dc) @ Cs + 1j * TC @ TC


def assemble_B_tilde(u: ChiralField) -> np.ndarray:
    """Generator of the flow itself: B_tilde = B - i L^2, assembled directly."""
    g = u.grid
    Ts = star_product_matrix(g, u.coeffs)
    Cs = conj_product_matrix(g, u.coeffs)
    return -1j * np.diag(g.xi**2).astype(complex) + 2j * Ts @ np.diag(g.xi) @ Cs


def lax_apply(u: ChiralField, f: np.ndarray) -> np.ndarray:
    """Matrix-free action of the Lax operator (two FFT products)."""
    g = u.grid
    return g.xi * f - chiral_product(g, conj_product(g, u.coeffs, f), u.coeffs)


# ---------------------------------------------------------------------------
# spectra


def bound_states(L: LaxMatrix, u: ChiralField, overlap_tol: float = 0.05,
                 localization_frac: float = 0.10) -> EigenSystem:
    """Bound states of L: the exact kernel state plus the negative-side
    discrete spectrum, filtered by the quantized-overlap and spatial-
    localization signatures.

    Candidates come from two places.  The subblock excluding mode 0 is
    Hermitian and is diagonalized directly.  The kernel state, whose
    weight on mode 0 is essential, is built from the boundary row by a
    bordered solve: v = (1, -A^{-1} b) with the mode-0 component then
    replaced by a smooth extrapolation (the structural row cannot supply
    it).  Filters: |<u,psi>|^2 / (2 pi ||psi||^2) within overlap_tol of
    one, and at most localization_frac of the state's density outside
    the central half of the box.
    """
    g = L.grid
    A = L.entries[1:, 1:]
    Ah = 0.5 * (A + A.conj().T)
    b = L.entries[1:, 0]
    lam_sub, V = np.linalg.eigh(Ah)

    v0 = np.concatenate([[1.0 + 0j], -np.linalg.solve(Ah, b)])
    v0[0] = _EXTRAP5 @ v0[1:6]

    cands = [(0.0, v0)]
    cands += [
        (float(lam_sub[i]), np.concatenate([[0.0 + 0j], V[:, i]]))
        for i in range(len(lam_sub))
    ]

    c = u.coeffs
    kept: list[tuple[float, np.ndarray, float]] = []
    uv = None
    for lam, psi in cands:
        n2 = inner(g, psi, psi).real
        ov = abs(inner(g, c, psi)) ** 2 / (2 * np.pi * n2)
        if abs(ov - 1.0) > overlap_tol:
            continue
        if uv is None:
            uv = np.abs(g.x) > g.L / 4
        dens = np.abs(values(ChiralField(g, psi))) ** 2
        if np.sum(dens[uv]) / np.sum(dens) > localization_frac:
            continue
        dup = any(
            abs(inner(g, psi, p2)) / np.sqrt(n2 * inner(g, p2, p2).real) > 0.5
            for _, p2, _ in kept
        )
        if dup:
            continue
        kept.append((lam, psi / np.sqrt(n2), ov))

    kept.sort(key=lambda r: r[0])
    lams = np.array([r[0] for r in kept])
    vecs = np.zeros((g.K, len(kept)), dtype=complex)
    ovs = np.zeros(len(kept))
    for j, (_, psi, ov) in enumerate(kept):
        ip = inner(g, c, psi)
        vecs[:, j] = psi * np.exp(1j * np.angle(ip))
        ovs[j] = ov
    return EigenSystem(lams, vecs, ovs, len(kept))


def conserved_hierarchy(u: ChiralField, kmax: int = 4) -> np.ndarray:
    """The tower I_k = <L^k u, u>, k = 0..kmax (I_0 is the mass,
    I_1 the momentum, I_2 twice the energy).  Truncation error grows
    with each application of L, hence the cap at kmax = 8."""
    if kmax > 8:
        raise ValueError("hierarchy accuracy decays past k = 8")
    g = u.grid
    out = np.empty(kmax + 1)
    v = u.coeffs.copy()
    for k in range(kmax + 1):
        out[k] = inner(g, v, u.coeffs).real
        if k < kmax:
            v = lax_apply(u, v)
    return out


def _gamma_of(grid: FrequencyGrid, psi: np.ndarray) -> tuple[float, float]:
    """<i d_xi psi, psi> via 4th-order stencils (one-sided at the ends).

    Returns (real part, imaginary part); the real part is the gamma
    datum, the imaginary part is a discretization diagnostic that
    converges to -rho at rate dxi^2.
    """
    d = np.empty_like(psi)
    h = grid.dxi
    f = psi
    d[2:-2] = (-f[4:] + 8 * f[3:-1] - 8 * f[1:-3] + f[:-4]) / (12 * h)
    d[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h)
    d[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12 * h)
    d[-2] = (3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]) / (12 * h)
    d[-1] = (25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]) / (12 * h)
    val = inner(grid, 1j * d, psi)
    return float(val.real), float(val.imag)


def spectral_data_from_potential(u: ChiralField, refine: bool = False,
                                 snap_tol: float = 1e-6):
    """Extract (phi, rho, lambda_j, gamma_j) from an N-soliton potential.

    rho and phi read off the boundary coefficient; the eigenvalues come
    from bound_states with the leading one snapped to zero (it must lie
    within snap_tol or the potential is not an N-soliton on this grid).
    gamma_j is the diagonal of the conjugate-variable operator in the
    eigenbasis.

    With refine=True one Richardson step removes the leading dxi^2
    eigenvalue bias by re-extracting on the 2-subsampled grid (same
    frequency cutoff, half the resolution).  Only meaningful for fields
    sampled from a smooth profile: subsampling a time-evolved lattice
    field is not a resample of anything smooth, and refinement then
    degrades rather than helps.
    """
    g = u.grid
    es = bound_states(assemble_lax(u), u)
    if es.bound_state_count == 0:
        raise ValueError("no bound states found")
    lam = es.eigenvalues.copy()
    i0 = int(np.argmin(np.abs(lam)))
    if abs(lam[i0]) > snap_tol:
        raise ValueError(
            f"leading eigenvalue {lam[i0]:.3e} too far from zero"
        )

    if refine and g.K % 2 == 0:
        sub = ChiralField(FrequencyGrid(g.K // 2, g.L / 2), u.coeffs[::2])
        es_c = bound_states(assemble_lax(sub), sub)
        if es_c.bound_state_count == es.bound_state_count:
            lam = (4 * lam - es_c.eigenvalues) / 3

    rest = [int(i) for i in np.argsort(lam) if i != i0]
    order = [i0] + rest
    lam_out = np.concatenate([[0.0], lam[rest]])
    gam = np.empty(len(order))
    for j, i in enumerate(order):
        gam[j], _ = _gamma_of(g, es.vectors[:, i])

    u0 = u.coeffs[0]
    rho = abs(u0) ** 2 / (8 * np.pi**2)
    phi = float(np.angle(u0 / (2j * np.pi)))
    return SpectralData(phi=phi, rho=rho, lam=lam_out, gamma=gam)


def lax_equation_residual(snapshots, dt: float) -> float:
    """Max-norm residual of dL/dt = [B, L]: centered difference across
    each snapshot triple versus the bracket at the middle time; the
    maximum over interior snapshots is returned.

    The value carries a dt-independent quadrature floor on top of the
    O(dt^2) differencing error, so refinement studies should compare
    consecutive differences of the residual rather than raw ratios.
    """
    if len(snapshots) < 3:
        raise ValueError("need at least three consecutive snapshots")
    mats = [assemble_lax(s).entries for s in snapshots]
    worst = 0.0
    for i in range(1, len(snapshots) - 1):
        B0 = assemble_B(snapshots[i])
        L0 = mats[i]
        res = (mats[i + 1] - mats[i - 1]) / (2 * dt) - (B0 @ L0 - L0 @ B0)
        worst = max(worst, float(np.max(np.abs(res))))
    return worst


def operator_bound_checks(u: ChiralField, f: ChiralField) -> dict:
    """Evaluate both sides of the two operator inequalities:

      ||C_u f||^2 <= (mass(u)/2pi) <xi f, f>        (conjugate product)
      ||H_u(d_x f)|| <= ||xi^{3/2} u|| / sqrt(2pi) * ||f||   (reversed product)

    where H_u f = P_+(u conj(f)).  Returns both sides and the excess
    (positive excess = violation beyond round-off).
    """
    g = u.grid
    cu, cf = u.coeffs, f.coeffs
    tf = conj_product(g, cu, cf)
    lhs1 = inner(g, tf, tf).real
    rhs1 = inner(g, cu, cu).real / (2 * np.pi) * inner(g, g.xi * cf, cf).real
    dxf = 1j * g.xi * cf
    lhs2 = norm(g, conj_product(g, dxf, cu))
    rhs2 = np.sqrt(inner(g, g.xi**3 * cu, cu).real / (2 * np.pi)) * norm(g, cf)
    return {
        "toeplitz_lhs": lhs1,
        "toeplitz_rhs": rhs1,
        "toeplitz_excess": lhs1 - rhs1,
        "hankel_lhs": lhs2,
        "hankel_rhs": float(rhs2),
        "hankel_excess": lhs2 - float(rhs2),
    }
