"""Position-space reconstruction and scar observables.

Zero-total-momentum eigenvectors are mapped to wavefunctions of the relative
coordinates r = x1 - x2 (heavy-heavy) and eta = y - (x1 + x2)/2 (light vs
heavy center), sampled on rectangular grids over one periodic cell.  The
same coefficient data feeds the collision-state diagnostics: the heavy
overlap integral at r = 0, strip concentration ratios, angular-averaged 3D
radial densities, pair projections, and the autocorrelation / local density
of states of an initial vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi

_trapz = getattr(np, "trapezoid", None) or np.trapz


@dataclass
class WavefunctionGrid:
    """Values sampled on a rectangular (r, eta) grid over one cell."""

    r_axis: np.ndarray
    eta_axis: np.ndarray
    values: np.ndarray          # (n_r, n_eta); complex amplitude or real density
    box_length: float
    kind: str = "wavefunction"
    meta: dict = field(default_factory=dict)

    @property
    def dr(self) -> float:
        return float(self.r_axis[1] - self.r_axis[0])

    @property
    def deta(self) -> float:
        return float(self.eta_axis[1] - self.eta_axis[0])

    def density(self) -> np.ndarray:
        if self.kind == "wavefunction":
            return np.abs(self.values) ** 2
        return np.real(self.values)

    def norm(self) -> float:
        """Cell integral of the density by the rectangle rule (exact for
        band-limited data on a full period)."""
        return float(np.sum(self.density()) * self.dr * self.deta)


def _coefficient_grid(coefficients, sector):
    """Scatter sector coefficients onto the (m = n1 - n2, p) lattice.

    The map (n1, n2) -> (m, p) is one-to-one inside a fixed-total-momentum
    sector, so this is a pure relabeling.
    """
    m = sector.n1 - sector.n2
    p = sector.p
    m_lo, m_hi = int(m.min()), int(m.max())
    p_lo, p_hi = int(p.min()), int(p.max())
    grid = np.zeros((m_hi - m_lo + 1, p_hi - p_lo + 1), dtype=np.complex128)
    grid[m - m_lo, p - p_lo] = coefficients
    m_vals = np.arange(m_lo, m_hi + 1)
    p_vals = np.arange(p_lo, p_hi + 1)
    return grid, m_vals, p_vals


def position_wavefunction_1d(coefficients, sector, params, n_r: int = 128,
                             n_eta: int = 128) -> WavefunctionGrid:
    """Evaluate Psi(r, eta) = (1/L) sum c exp(i pi m r / L) exp(i 2 pi p eta / L).

    The square [-L/2, L/2)^2 is a valid fundamental domain of the relative-
    coordinate cell.  Grids are endpoint-free so even n_r places a node
    exactly at r = 0.
    """
    if tuple(np.atleast_1d(sector.total_momentum)) != (0,):
        raise ValueError("position reconstruction requires the P = 0 sector")
    if len(coefficients) != sector.dim:
        raise ValueError(f"coefficient length {len(coefficients)} != sector dim "
                         f"{sector.dim}")
    L = params.box_length
    grid, m_vals, p_vals = _coefficient_grid(np.asarray(coefficients), sector)
    r_axis = -L / 2 + (L / n_r) * np.arange(n_r)
    eta_axis = -L / 2 + (L / n_eta) * np.arange(n_eta)
    er = np.exp(1j * np.pi * np.outer(r_axis, m_vals) / L)
    ep = np.exp(1j * TWO_PI * np.outer(p_vals, eta_axis) / L)
    values = (er @ grid @ ep) / L
    return WavefunctionGrid(r_axis, eta_axis, values, L, "wavefunction",
                            meta={"n_r": n_r, "n_eta": n_eta})


def heavy_overlap(grid: WavefunctionGrid) -> float:
    """Integral of |Psi(0, eta)|^2 over eta: weight on the heavy collision set."""
    j = int(np.argmin(np.abs(grid.r_axis)))
    if abs(grid.r_axis[j]) > 1e-9 * grid.box_length:
        raise ValueError("grid has no node at r = 0; use an even r count")
    return float(np.sum(grid.density()[j, :]) * grid.deta)


def concentration_ratio(grid: WavefunctionGrid, strip_half_width: float) -> float:
    """Probability fraction inside the strip |r| <= strip_half_width.

    Nodes exactly on the strip boundary count with half weight, so a flat
    density with strip_half_width = L/4 gives exactly 0.5.
    """
    if not 0 < strip_half_width <= grid.box_length / 2:
        raise ValueError(f"strip_half_width must lie in (0, L/2], got "
                         f"{strip_half_width}")
    absr = np.abs(grid.r_axis)
    w = np.where(absr < strip_half_width, 1.0,
                 np.where(absr == strip_half_width, 0.5, 0.0))
    dens = grid.density()
    total = float(np.sum(dens))
    if total == 0:
        raise ValueError("grid carries no probability")
    return float(np.sum(w @ dens) / total)


@dataclass
class AutocorrelationSeries:
    """C(t) of an initial vector and its Gaussian-broadened energy profile."""

    times: np.ndarray
    values: np.ndarray          # complex C(t)
    weights: np.ndarray         # |c_n|^2
    energies: np.ndarray        # eigenvalues carrying the weights
    energy_grid: np.ndarray
    spectral_density: np.ndarray
    broadening: float

    def spectral_mass(self) -> float:
        return float(_trapz(self.spectral_density, self.energy_grid))


def autocorrelation(coefficients, eigenvalues, times, broadening: float,
                    energy_grid=None) -> AutocorrelationSeries:
    """C(t) = sum |c_n|^2 exp(-i E_n t) and S(E) = sum |c_n|^2 N(E; E_n, lambda).

    Requires a unit-norm coefficient vector.  The default energy grid covers
    every weighted eigenvalue plus six broadening widths on each side, at a
    step of broadening / 8; trapezoid integration of S over that grid is then
    accurate to well below 1e-6.
    """
    c = np.asarray(coefficients)
    evals = np.asarray(eigenvalues, dtype=np.float64)
    if len(c) != len(evals):
        raise ValueError(f"coefficient length {len(c)} != eigenvalue count "
                         f"{len(evals)}")
    if not broadening > 0:
        raise ValueError(f"broadening must be positive, got {broadening}")
    w = np.abs(c) ** 2
    total = float(w.sum())
    if abs(total - 1.0) > 1e-8:
        raise ValueError(f"coefficients must have unit norm, got |c|^2 = {total}")
    times = np.asarray(times, dtype=np.float64)
    values = np.exp(-1j * np.outer(times, evals)) @ w

    if energy_grid is None:
        heavy = evals[w > 1e-14]
        if len(heavy) == 0:
            heavy = evals
        lo = float(heavy.min()) - 6.0 * broadening
        hi = float(heavy.max()) + 6.0 * broadening
        n_pts = int(np.ceil((hi - lo) / (broadening / 8.0))) + 1
        energy_grid = np.linspace(lo, hi, n_pts)
    else:
        energy_grid = np.asarray(energy_grid, dtype=np.float64)
    z = (energy_grid[:, None] - evals[None, :]) / broadening
    dens = np.exp(-0.5 * z * z) @ w / (broadening * np.sqrt(TWO_PI))
    return AutocorrelationSeries(times, values, w, evals, energy_grid, dens,
                                 broadening)


# ---------------------------------------------------------------------------
# 3D observables


@dataclass
class RadialDensity:
    """Angular-integrated density P(r, eta) = int |Psi|^2 dOmega_r dOmega_eta
    on a rectangular radial grid, with trapezoid weights for moment taking."""

    r_axis: np.ndarray
    eta_axis: np.ndarray
    values: np.ndarray
    r_weights: np.ndarray
    eta_weights: np.ndarray
    box_length: float
    meta: dict = field(default_factory=dict)

    def mass(self) -> float:
        """int P r^2 eta^2 dr deta over the covered radial rectangle."""
        wr = self.r_weights * self.r_axis ** 2
        we = self.eta_weights * self.eta_axis ** 2
        return float(wr @ self.values @ we)

    def mass_small_r(self, r_cut: float) -> float:
        """Same moment restricted to nodes with r <= r_cut (no cell splitting)."""
        keep = self.r_axis <= r_cut
        wr = (self.r_weights * self.r_axis ** 2)[keep]
        we = self.eta_weights * self.eta_axis ** 2
        return float(wr @ self.values[keep] @ we)


def _trapezoid_weights(axis: np.ndarray) -> np.ndarray:
    w = np.full(len(axis), axis[1] - axis[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def _pair_signature_weights(coefficients, sector):
    """Unique (|dm|^2, |dp|^2) signatures and their summed Re(c_a conj(c_b))."""
    c = np.asarray(coefficients, dtype=np.complex128)
    m = (sector.n1 - sector.n2).astype(np.int64)
    p = sector.p.astype(np.int64)
    dm = m[:, None, :] - m[None, :, :]
    dp = p[:, None, :] - p[None, :, :]
    dm2 = np.einsum("abk,abk->ab", dm, dm)
    dp2 = np.einsum("abk,abk->ab", dp, dp)
    wre = np.real(np.outer(c, np.conj(c)))
    key = dm2.ravel() * (dp2.max() + 1) + dp2.ravel()
    uniq, inverse = np.unique(key, return_inverse=True)
    acc = np.bincount(inverse, weights=wre.ravel())
    dm2u = uniq // (dp2.max() + 1)
    dp2u = uniq % (dp2.max() + 1)
    return dm2u, dp2u, acc


def _j0(x: np.ndarray) -> np.ndarray:
    out = np.ones_like(x)
    nz = x != 0
    out[nz] = np.sin(x[nz]) / x[nz]
    return out


def integrated_probability_3d(coefficients, sector, params, n_r: int = 48,
                              n_eta: int = 48, r_max: float | None = None,
                              eta_max: float | None = None,
                              method: str = "analytic",
                              n_angle: int = 16) -> RadialDensity:
    """Angular-integrated two-radius density of a 3D eigenvector.

    The analytic route reduces each angular average to a spherical Bessel
    factor, P = (4 pi)^2 / L^6 * sum_ab Re(c_a c_b*) j0(|dk| r) j0(|dq| eta);
    the quadrature route averages |Psi|^2 over product angular grids and is
    kept as an independent cross-check.  Radial domains default to the
    volume-matching sphere radius rho L / 2.
    """
    if len(coefficients) != sector.dim:
        raise ValueError(f"coefficient length {len(coefficients)} != sector dim "
                         f"{sector.dim}")
    from .hamiltonian3d import RHO

    L = params.box_length
    if r_max is None:
        r_max = RHO * L / 2.0
    if eta_max is None:
        eta_max = RHO * L / 2.0
    r_axis = np.linspace(0.0, r_max, n_r)
    eta_axis = np.linspace(0.0, eta_max, n_eta)

    if method == "analytic":
        dm2, dp2, acc = _pair_signature_weights(coefficients, sector)
        kr = np.pi * np.sqrt(dm2.astype(np.float64)) / L
        qe = TWO_PI * np.sqrt(dp2.astype(np.float64)) / L
        jr = _j0(np.outer(r_axis, kr))            # (n_r, U)
        je = _j0(np.outer(eta_axis, qe))          # (n_eta, U)
        values = (4.0 * np.pi) ** 2 / L ** 6 * (jr * acc) @ je.T
    elif method == "quadrature":
        values = _integrated_probability_quadrature(
            coefficients, sector, L, r_axis, eta_axis, n_angle)
    else:
        raise ValueError(f"unknown method {method!r}")
    return RadialDensity(r_axis, eta_axis, values,
                         _trapezoid_weights(r_axis), _trapezoid_weights(eta_axis),
                         L, meta={"method": method, "r_max": r_max,
                                  "eta_max": eta_max})


def _sphere_points(n_angle: int):
    """Product angular rule: Gauss-Legendre in cos(theta), uniform in phi."""
    x, w = np.polynomial.legendre.leggauss(n_angle)
    phi = TWO_PI * np.arange(2 * n_angle) / (2 * n_angle)
    ct = x[:, None] + 0.0 * phi[None, :]
    st = np.sqrt(1.0 - x[:, None] ** 2) + 0.0 * phi[None, :]
    pts = np.stack([st * np.cos(phi[None, :]), st * np.sin(phi[None, :]), ct],
                   axis=-1).reshape(-1, 3)
    wts = (w[:, None] * (TWO_PI / (2 * n_angle)) * np.ones_like(phi)[None, :]).ravel()
    return pts, wts


def _integrated_probability_quadrature(coefficients, sector, L, r_axis,
                                       eta_axis, n_angle):
    c = np.asarray(coefficients, dtype=np.complex128)
    k = np.pi * (sector.n1 - sector.n2) / L      # (N, 3)
    q = TWO_PI * sector.p / L
    pts, wts = _sphere_points(n_angle)
    values = np.empty((len(r_axis), len(eta_axis)))
    for i, r in enumerate(r_axis):
        er = np.exp(1j * (r * pts) @ k.T)        # (P, N)
        for j, eta in enumerate(eta_axis):
            ee = np.exp(1j * (eta * pts) @ q.T)
            amp = (er * c) @ ee.T                # (P_r, P_eta)
            values[i, j] = float(wts @ (np.abs(amp) ** 2) @ wts)
    return values / L ** 6


def pair_projection_3d(coefficients, sector, params, component_r: int,
                       component_eta: int, n_r: int = 64,
                       n_eta: int = 64) -> WavefunctionGrid:
    """Joint density of one heavy-pair component r_i and one light component
    eta_j, all other coordinates integrated out.

    Like pairs (i == j) probe the coupled motion of matching components;
    unlike pairs (i != j) factor through independent marginals.
    """
    if component_r not in (0, 1, 2) or component_eta not in (0, 1, 2):
        raise ValueError(f"component indices must be 0, 1 or 2, got "
                         f"({component_r}, {component_eta})")
    if len(coefficients) != sector.dim:
        raise ValueError(f"coefficient length {len(coefficients)} != sector dim "
                         f"{sector.dim}")
    L = params.box_length
    c = np.asarray(coefficients, dtype=np.complex128)
    m = (sector.n1 - sector.n2).astype(np.int64)
    p = sector.p.astype(np.int64)

    dm = m[:, None, :] - m[None, :, :]
    dp = p[:, None, :] - p[None, :, :]
    other_r = [ax for ax in range(3) if ax != component_r]
    other_e = [ax for ax in range(3) if ax != component_eta]
    keep = ((dm[:, :, other_r] == 0).all(axis=2)
            & (dp[:, :, other_e] == 0).all(axis=2))
    dmi = dm[:, :, component_r][keep]
    dpj = dp[:, :, component_eta][keep]
    wab = np.outer(c, np.conj(c))[keep]

    m_off, p_off = int(dmi.min()), int(dpj.min())
    grid = np.zeros((int(dmi.max()) - m_off + 1, int(dpj.max()) - p_off + 1),
                    dtype=np.complex128)
    np.add.at(grid, (dmi - m_off, dpj - p_off), wab)

    u_axis = -L / 2 + (L / n_r) * np.arange(n_r)
    v_axis = -L / 2 + (L / n_eta) * np.arange(n_eta)
    m_vals = np.arange(m_off, m_off + grid.shape[0])
    p_vals = np.arange(p_off, p_off + grid.shape[1])
    eu = np.exp(1j * np.pi * np.outer(u_axis, m_vals) / L)
    ev = np.exp(1j * TWO_PI * np.outer(p_vals, v_axis) / L)
    values = np.real(eu @ grid @ ev) / L ** 2
    return WavefunctionGrid(u_axis, v_axis, values, L, "pair-density",
                            meta={"component_r": component_r,
                                  "component_eta": component_eta,
                                  "like": component_r == component_eta})
