"""Cross sections, viscosity laws and the fast spectral Boltzmann operator.

Every collision kernel is a sum of power-law terms

    B(theta, g) = kappa * sin(theta/2)**(alpha - 1) * g**alpha,

which makes the Carleman weight separable: B~(x, y) = 4 kappa |x|**(alpha-1)
with no dependence on |y|.  The gain term is then a sum over half-sphere
directions e of products of two Fourier-filtered copies of f,

    Q+(v) = sum_e w_e  [Phi_e * f](v) [Psi_e * f](v),

and the loss term is f times a convolution of f with the angle-integrated
kernel.  Hard spheres are alpha = 1.  The VHS model is replaced by the
anisotropic term with alpha = 2(1 - omega), which has the same viscosity law.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft
from scipy.special import gamma, j1, roots_jacobi, roots_legendre

from .errors import ConfigurationError, DegenerateStateError, NumericError

__all__ = [
    "CollisionModel", "SpectralKernel", "viscosity", "relaxation_time", "build_kernel",
    "boltzmann_Q", "collision_frequency", "conserve_fix", "direct_Q_oracle",
    "lj_viscosity_si", "LJ_ALPHA", "LJ_B", "LJ_EPS_K", "LJ_DIAMETER", "mu_from_knudsen",
    "mean_free_time_ratio",
]

LJ_ALPHA = (0.2, 0.1, 0.0)
LJ_B = (407.4, -881.9, 414.4)
LJ_EPS_K = 119.18          # potential depth over Boltzmann constant, Kelvin
LJ_DIAMETER = 3.42e-10     # metres
K_BOLTZMANN = 1.380649e-23
ARGON_MASS = 6.6335209e-26

FAMILIES = ("hs", "vhs", "lj")


def _viscosity_factor(alpha):
    """Chapman-Enskog viscosity integral of one unit-amplitude power-law term.

    For B = kappa s^(alpha-1) g^alpha the first-approximation viscosity at
    T = 1 is (5/16) sqrt(2 pi) / (kappa * G(alpha)).
    """
    a = float(alpha)
    return 64.0 * np.pi / ((a + 3.0) * (a + 5.0)) * 2.0 ** ((a - 1.0) / 2.0) * 0.5 * gamma((a + 7.0) / 2.0)


def mu_from_knudsen(kn, omega):
    """Reference viscosity giving mean free path ``kn`` at rho = T = 1."""
    return 15.0 * np.sqrt(np.pi) * kn / (2.0 * (7.0 - 2.0 * omega) * (5.0 - 2.0 * omega))


def mean_free_time_ratio(omega):
    """tau_r / tau for a power-law viscosity with exponent omega."""
    return 30.0 / ((7.0 - 2.0 * omega) * (5.0 - 2.0 * omega))


def lj_viscosity_si(T, m=ARGON_MASS, d=LJ_DIAMETER, eps_k=LJ_EPS_K, alpha=LJ_ALPHA, b=LJ_B):
    """Dimensional viscosity of the fitted L-J law, Pa s, literal form.

    With the tabulated coefficients the denominator sum is negative at every
    temperature of interest; only ratios of this law are physically used.
    """
    kT = K_BOLTZMANN * np.asarray(T, dtype=float)
    s = sum(bj * (kT / (K_BOLTZMANN * eps_k)) ** ((aj - 1.0) / 2.0) for aj, bj in zip(alpha, b))
    return 5.0 * np.sqrt(np.pi * m * kT) / (8.0 * d ** 2 * s)


@dataclass(frozen=True)
class CollisionModel:
    """Cross-section family with its nondimensional viscosity law.

    ``mu_ref`` is the viscosity at the reference temperature T = 1.  For the
    L-J family ``T0`` (Kelvin) fixes where the fit is evaluated.
    """

    family: str = "hs"
    mu_ref: float = 1.0
    omega: float = 0.81
    T0: float = 273.0
    lj_alpha: tuple = LJ_ALPHA
    lj_b: tuple = LJ_B
    lj_eps_k: float = LJ_EPS_K

    def __post_init__(self):
        fam = self.family.lower()
        object.__setattr__(self, "family", fam)
        if fam not in FAMILIES:
            raise ConfigurationError(f"unknown collision family {self.family!r}")
        if not self.mu_ref > 0:
            raise ConfigurationError("mu_ref must be positive")
        if fam == "vhs" and not 0.5 <= self.omega <= 1.0:
            raise ConfigurationError(f"VHS omega must lie in [0.5, 1], got {self.omega}")
        if fam == "lj":
            a = tuple(float(x) for x in self.lj_alpha)
            if len(a) != len(self.lj_b) or any(x <= y for x, y in zip(a, a[1:])):
                raise ConfigurationError("L-J exponents must be strictly decreasing")
            if not self.T0 > 0:
                raise ConfigurationError("T0 must be positive")

    @classmethod
    def from_knudsen(cls, family, kn, omega=0.81, **kw):
        """Model whose equilibrium mean free path at rho = T = 1 equals ``kn``."""
        probe = cls(family=family, omega=omega, **kw)
        return cls(family=family, mu_ref=mu_from_knudsen(kn, probe.effective_omega),
                   omega=omega, **kw)

    @property
    def effective_omega(self):
        """Local exponent d log mu / d log T at T = 1."""
        if self.family == "hs":
            return 0.5
        if self.family == "vhs":
            return float(self.omega)
        h = 1e-4
        return float(np.log(self.viscosity(np.exp(h)) / self.viscosity(np.exp(-h))) / (2 * h))

    def _lj_sum(self, T):
        x = np.asarray(T, dtype=float) * self.T0 / self.lj_eps_k
        return sum(bj * x ** ((aj - 1.0) / 2.0) for aj, bj in zip(self.lj_alpha, self.lj_b))

    def viscosity(self, T):
        T = np.asarray(T, dtype=float)
        if self.family == "hs":
            return self.mu_ref * np.sqrt(T)
        if self.family == "vhs":
            return self.mu_ref * T ** self.omega
        return self.mu_ref * np.sqrt(T) * self._lj_sum(1.0) / self._lj_sum(T)

    def relaxation_time(self, rho, T, R=0.5):
        """tau_r = mu(T) / p, vectorised."""
        return self.viscosity(T) / (np.asarray(rho) * R * np.asarray(T))

    def inverse_relaxation_time(self, rho, T, R=0.5):
        return (np.asarray(rho) * R * np.asarray(T)) / self.viscosity(T)

    def kernel_terms(self):
        """List of (kappa, alpha) with B = kappa s^(alpha-1) g^alpha."""
        if self.family == "hs":
            a = 1.0
            return [((5.0 / 16.0) * np.sqrt(2 * np.pi) / (self.mu_ref * _viscosity_factor(a)), a)]
        if self.family == "vhs":
            a = 2.0 * (1.0 - self.omega)
            return [((5.0 / 16.0) * np.sqrt(2 * np.pi) / (self.mu_ref * _viscosity_factor(a)), a)]
        # relative amplitudes from the fitted cross section; the overall
        # factor is set by mu_ref through the viscosity integral
        rel = [bj * (self.T0 / (2.0 * self.lj_eps_k)) ** ((aj - 1.0) / 2.0) / gamma((3.0 + aj) / 2.0)
               for aj, bj in zip(self.lj_alpha, self.lj_b)]
        denom = sum(r * _viscosity_factor(a) for r, a in zip(rel, self.lj_alpha))
        kappa0 = (5.0 / 16.0) * np.sqrt(2 * np.pi) / (self.mu_ref * denom)
        return [(kappa0 * r, float(a)) for r, a in zip(rel, self.lj_alpha)]


def viscosity(model, T):
    return model.viscosity(T)


def relaxation_time(model, state):
    return float(model.relaxation_time(state.rho, state.T, state.R))


# ---------------------------------------------------------------------------
# spectral kernel

def sphere_quadrature(n_theta, n_phi):
    """Half-sphere directions (z >= 0) and weights summing to 2 pi."""
    x, wx = roots_legendre(n_theta)
    ct = 0.5 * (x + 1.0)
    wt = 0.5 * wx
    phi = 2.0 * np.pi * (np.arange(n_phi) + 0.5) / n_phi
    st = np.sqrt(1.0 - ct ** 2)
    e = np.stack([np.outer(st, np.cos(phi)).ravel(), np.outer(st, np.sin(phi)).ravel(),
                  np.repeat(ct, n_phi)], axis=1)
    w = np.repeat(wt, n_phi) * (2.0 * np.pi / n_phi)
    return e, w


class SpectralKernel:
    """Precomputed Fourier weights of the fast spectral operator.

    Parameters
    ----------
    grid : VelocityGrid
    terms : list of (kappa, alpha) power-law kernel terms
    modes : int, retained Fourier modes per axis (<= N)
    sphere_points : (n_theta, n_phi) or int (square product rule)
    support : distribution support radius S; truncation radius is 2 S
    """

    def __init__(self, grid, terms, modes=None, sphere_points=(8, 8), support=None):
        N = grid.N
        modes = N if modes is None else int(modes)
        if modes > N or modes < 2:
            raise ConfigurationError(f"modes must lie in [2, {N}], got {modes}")
        if np.isscalar(sphere_points):
            sphere_points = (int(sphere_points), int(sphere_points))
        n_theta, n_phi = (int(s) for s in sphere_points)
        if n_theta < 1 or n_phi < 1:
            raise ConfigurationError("sphere quadrature needs at least one point per angle")
        s_max = 2.0 * grid.L / (3.0 + np.sqrt(2.0))
        support = s_max if support is None else float(support)
        if not 0 < support <= s_max * (1 + 1e-12):
            raise ConfigurationError(
                f"dealiasing requires support radius <= {s_max:.6g} for L = {grid.L}, got {support}")
        self.grid = grid
        self.modes = modes
        self.terms = [(float(k), float(a)) for k, a in terms]
        self.support = support
        self.R = 2.0 * support
        self.directions, self.dir_weights = sphere_quadrature(n_theta, n_phi)
        self._build()

    # frequency lattice -------------------------------------------------
    def _freqs(self, half):
        N, h = self.grid.N, self.grid.spacing
        k = np.fft.fftfreq(N, 1.0 / N)
        kz = np.fft.rfftfreq(N, 1.0 / N) if half else k
        mask = ((np.abs(k) < self.modes / 2.0)[:, None, None]
                & (np.abs(k) < self.modes / 2.0)[None, :, None]
                & (np.abs(kz) < self.modes / 2.0)[None, None, :])
        xi = 2.0 * np.pi / (N * h)
        return xi * k, xi * k, xi * kz, mask

    def _radial(self, s):
        """Phi(s) = 8 sum_j kappa_j int_0^R rho^alpha_j cos(rho s) d rho."""
        R = self.R
        out = np.zeros_like(s)
        smax = float(np.max(np.abs(s))) if s.size else 0.0
        n = max(64, int(R * smax / 2.0) + 48)
        for kappa, alpha in self.terms:
            if alpha == 1.0:
                with np.errstate(divide="ignore", invalid="ignore"):
                    val = R * np.sin(R * s) / s + (np.cos(R * s) - 1.0) / s ** 2
                small = np.abs(R * s) < 1e-4
                val = np.where(small, R * R / 2.0 - (R ** 4) * s ** 2 / 8.0, val)
            else:
                t, wq = roots_jacobi(n, 0.0, alpha)
                rho = 0.5 * R * (1.0 + t)
                scale = (0.5 * R) ** (alpha + 1.0)
                val = np.zeros_like(s)
                for r, wr in zip(rho, wq):
                    val += wr * np.cos(r * s)
                val *= scale
            out += 8.0 * kappa * val
        return out

    def _transverse(self, w):
        R = self.R
        with np.errstate(divide="ignore", invalid="ignore"):
            val = 2.0 * np.pi * R * j1(R * w) / w
        return np.where(w * R < 1e-8, np.pi * R * R, val)

    def _tables(self, half):
        kx, ky, kz, mask = self._freqs(half)
        KX, KY, KZ = np.meshgrid(kx, ky, kz, indexing="ij")
        K2 = KX ** 2 + KY ** 2 + KZ ** 2
        m = len(self.dir_weights)
        phi = np.empty((m,) + K2.shape)
        psi = np.empty((m,) + K2.shape)
        for i, (e, we) in enumerate(zip(self.directions, self.dir_weights)):
            s = KX * e[0] + KY * e[1] + KZ * e[2]
            wperp = np.sqrt(np.maximum(K2 - s * s, 0.0))
            phi[i] = we * self._radial(s) * mask
            psi[i] = self._transverse(wperp) * mask
        return phi, psi

    def _build(self):
        self.phi, self.psi = self._tables(half=True)
        self.beta_diag = np.einsum("m...,m...->...", self.phi, self.psi)
        if not (np.all(np.isfinite(self.phi)) and np.all(np.isfinite(self.psi))):
            raise NumericError("non-finite spectral kernel weights")

    @cached_property
    def full_tables(self):
        """Weights on the full (non-halved) spectrum, used by the oracle."""
        return self._tables(half=False)

    # evaluation --------------------------------------------------------
    def _check(self, arr, what):
        if not np.all(np.isfinite(arr)):
            raise NumericError(f"non-finite values in {what}")

    def frequency(self, f, fhat=None):
        """Collision frequency nu(v) on the lattice for one distribution."""
        N = self.grid.N
        if fhat is None:
            fhat = sfft.rfftn(f)
        nu = sfft.irfftn(self.beta_diag * fhat, s=(N, N, N))
        self._check(nu, "collision frequency")
        return nu

    def gain_loss(self, f):
        """(Q+, nu) for one distribution; Q = Q+ - nu f."""
        f = np.asarray(f, dtype=float)
        self._check(f, "distribution")
        N = self.grid.N
        fhat = sfft.rfftn(f)
        a = sfft.irfftn(self.phi * fhat, s=(N, N, N), axes=(1, 2, 3))
        b = sfft.irfftn(self.psi * fhat, s=(N, N, N), axes=(1, 2, 3))
        gain = np.einsum("m...,m...->...", a, b)
        nu = self.frequency(f, fhat)
        self._check(gain, "gain term")
        return gain, nu

    def collide(self, f):
        gain, nu = self.gain_loss(f)
        return gain - nu * f


def build_kernel(model, grid, modes=None, sphere_points=(8, 8), support=None):
    return SpectralKernel(grid, model.kernel_terms(), modes, sphere_points, support)


def collision_frequency(f, kernel):
    """Per-node collision frequency and its supremum over the lattice."""
    nu = kernel.frequency(np.asarray(f, dtype=float))
    return nu, float(np.max(nu))


def boltzmann_Q(f, kernel, fix=True):
    """Spectral collision rate, optionally corrected to conserve all moments."""
    Q = kernel.collide(f)
    return conserve_fix(Q, kernel.grid) if fix else Q


def conserve_fix(rate, grid, weight=None):
    """Smallest weighted correction that zeroes the five conserved moments.

    The correction is ``weight * (lambda . psi)`` with the default weight
    |rate|, so nodes where the rate vanishes are left untouched.  Accepts
    batches with leading axes.
    """
    rate = np.asarray(rate, dtype=float)
    if not np.all(np.isfinite(rate)):
        raise NumericError("non-finite collision rate")
    wgt = np.abs(rate) if weight is None else np.asarray(weight, dtype=float)
    psi = grid.psi.reshape(5, -1)
    lead = rate.shape[:-3]
    r = rate.reshape(lead + (-1,))
    wv = np.broadcast_to(wgt, rate.shape).reshape(lead + (-1,))
    mom = r @ psi.T
    scale = np.abs(r) @ np.abs(psi.T)
    if np.all(np.abs(mom) <= 1e-15 * np.maximum(scale, 1e-300)):
        return rate.copy()
    A = np.einsum("...k,ak,bk->...ab", wv, psi, psi)
    try:
        cond = np.linalg.cond(A)
    except np.linalg.LinAlgError:
        cond = np.inf
    if np.any(~np.isfinite(cond)) or np.any(cond > 1e14):
        raise DegenerateStateError("singular moment matrix in conservation fix")
    lam = np.linalg.solve(A, mom[..., None])[..., 0]
    out = r - wv * (lam @ psi)
    return out.reshape(rate.shape)


def direct_Q_oracle(f, kernel):
    """Same discrete operator as boltzmann_Q without fast transforms.

    Sums every mode pair (l, m) explicitly on the unwrapped frequency
    lattice and evaluates the resulting Fourier series at the nodes.
    """
    grid = kernel.grid
    N, h, L = grid.N, grid.spacing, grid.L
    k = np.fft.fftfreq(N, 1.0 / N).astype(int)
    xi = 2.0 * np.pi / (N * h)
    # Fourier coefficients with the cell-centred phase: f(v_j) = sum fhat e^{i xi v_j}
    ph = np.exp(-1j * xi * k * (-L + 0.5 * h))
    fhat = np.fft.fftn(f) / N ** 3 * ph[:, None, None] * ph[None, :, None] * ph[None, None, :]
    phi, psi = kernel.full_tables
    P = phi.reshape(phi.shape[0], -1)
    S = psi.reshape(psi.shape[0], -1)
    G = P.T @ S                                 # gain weight beta(l, m)
    loss = np.einsum("mi,mi->i", P, S)          # beta(m, m)
    fv = fhat.ravel()
    C = (G - loss[None, :]) * np.outer(fv, fv)
    KX, KY, KZ = np.meshgrid(k, k, k, indexing="ij")
    kl = np.stack([KX.ravel(), KY.ravel(), KZ.ravel()], axis=1)
    n2 = 2 * N
    idx = ((kl[:, None, :] + kl[None, :, :]) + N)  # shifted into [0, 2N)
    flat = (idx[..., 0] * n2 + idx[..., 1]) * n2 + idx[..., 2]
    acc = (np.bincount(flat.ravel(), weights=C.real.ravel(), minlength=n2 ** 3)
           + 1j * np.bincount(flat.ravel(), weights=C.imag.ravel(), minlength=n2 ** 3))
    acc = acc.reshape(n2, n2, n2)
    s = np.arange(n2) - N
    E = np.exp(1j * xi * np.outer(s, grid.nodes))
    Q = np.einsum("abc,ai,bj,ck->ijk", acc, E, E, E, optimize=True)
    return Q.real


def moments_of_rate(rate, grid):
    """Conserved moments of a collision rate (mass, momentum, energy)."""
    return np.tensordot(np.asarray(rate), grid.psi, axes=([-3, -2, -1], [1, 2, 3])) * grid.weight

