"""Pseudo-spectral Newton solver for the 1D gap soliton.

Solves ``U'' + omega^2 U + eps W(x) U = sigma U^3`` for real, even ``U`` on
the periodic box ``[-pi K, pi K)`` with ``omega^2 = n^2/4 + eps Omega``.  The
box holds ``K`` periods of the potential; the soliton decays on the slow
scale ``1/(eps kappa)`` so wraparound is exponentially small in ``K``.
"""

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .coupled_mode import CoupledModeParams, SolitonProfile, leading_order_field
from .errors import DomainTooSmall, InvalidRegime
from .newton import newton

__all__ = [
    "SolverConfig",
    "GridField",
    "PartitionReport",
    "SolitonResult",
    "solve_soliton",
    "soliton_sweep",
    "error_vs_cm",
    "partition_diagnostic",
    "residual_check",
]


@dataclass(frozen=True)
class SolverConfig:
    K: int = 64
    N: int = 8192
    tol: float = 1e-10
    max_iter: int = 30
    edge_tol: float = 1e-3
    gap_fraction: float = 0.9

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be a positive integer")
        if self.N < 2 or self.N & (self.N - 1):
            raise ValueError("N must be a power of two")
        if self.N < 64 * self.K:
            raise ValueError(f"N={self.N} under-resolves K={self.K} periods (need N >= 64 K)")

    @property
    def length(self):
        return 2 * np.pi * self.K

    @property
    def dx(self):
        return self.length / self.N

    def grid(self):
        return -np.pi * self.K + self.dx * np.arange(self.N)

    def wavenumbers(self):
        return 2 * np.pi * scipy.fft.fftfreq(self.N, self.dx)


@dataclass
class GridField:
    x: np.ndarray
    u: np.ndarray

    @property
    def dx(self):
        return self.x[1] - self.x[0]

    def spectrum(self):
        """Wavenumbers and ``dx/sqrt(2 pi) * sum_j U_j e^{-ik x_j}`` (continuous transform scale)."""
        k = 2 * np.pi * scipy.fft.fftfreq(self.x.size, self.dx)
        uhat = self.dx / np.sqrt(2 * np.pi) * np.exp(-1j * k * self.x[0]) * scipy.fft.fft(self.u)
        return k, uhat

    def reflect(self):
        """Samples of ``U(-x)`` on the same grid."""
        N = self.x.size
        return self.u[(N - np.arange(N)) % N]


@dataclass
class PartitionReport:
    mass_plus: float
    mass_minus: float
    mass_zero: float
    half_width: float

    @property
    def ratio(self):
        return self.mass_zero / (self.mass_plus + self.mass_minus)

    def as_dict(self):
        return {
            "mass_plus": self.mass_plus,
            "mass_minus": self.mass_minus,
            "mass_zero": self.mass_zero,
            "ratio": self.ratio,
            "half_width": self.half_width,
        }


@dataclass
class SolitonResult:
    field: GridField
    iterations: int
    residual: float
    seed: np.ndarray

    @property
    def peak(self):
        return float(np.max(np.abs(self.field.u)))


def _d2_circulant(cfg):
    k = cfg.wavenumbers()
    return np.real(scipy.fft.ifft(-(k**2)))


def _even_d2(cfg):
    """Second-derivative matrix acting on samples ``U(i dx)``, ``i = 0..N/2``, of an even field."""
    N = cfg.N
    h = N // 2
    c = _d2_circulant(cfg)
    i = np.arange(h + 1)
    D = c[(i[:, None] - i[None, :]) % N] + c[(i[:, None] + i[None, :]) % N]
    D[:, 0] = c[i % N]
    D[:, h] = c[(i - h) % N]
    return D


def _unfold(half, N):
    """Full even field from its samples at ``x = i dx``, ``i = 0..N/2``."""
    return half[np.abs(np.arange(N) - N // 2)]


def _pde_residual(u, cfg, potential, omega2, eps, sigma, x):
    k = cfg.wavenumbers()
    d2 = np.real(scipy.fft.ifft(-(k**2) * scipy.fft.fft(u)))
    return d2 + (omega2 + eps * potential.evaluate(x)) * u - sigma * np.abs(u) ** 2 * u


def _check_params(params, cfg, potential):
    if potential.w2(params.n) != params.w2n:
        raise ValueError(f"potential has w_2n = {potential.w2(params.n)}, params say {params.w2n}")
    if not params.soliton_regime():
        raise InvalidRegime("parameters lie outside the gap-soliton regime (need sigma*w > 0, |Omega| < |w|)")
    if abs(params.Omega) > cfg.gap_fraction * abs(params.w2n):
        raise InvalidRegime(
            f"|Omega| = {abs(params.Omega)} exceeds {cfg.gap_fraction} |w_2n|; too close to the gap edge"
        )
    if (params.n * cfg.K) % 2:
        raise ValueError("n K must be even so that exp(i n x / 2) is periodic on the box")


def solve_soliton(params, cfg, potential, seed=None):
    """Newton solve for the gap soliton, started from the coupled-mode field.

    ``seed`` overrides the initial iterate (full grid samples, must be even).
    Returns a :class:`SolitonResult`; raises ``DomainTooSmall`` when the
    coupled-mode envelope at the box edge exceeds ``edge_tol`` times its peak.
    """
    _check_params(params, cfg, potential)
    x = cfg.grid()
    profile = SolitonProfile(params)
    eps = params.eps
    if seed is None:
        seed = leading_order_field(profile, x)
    seed = np.asarray(seed, dtype=float)
    if eps > 0:
        peak_env = 2 * np.sqrt(eps) * np.abs(profile(0.0)[0])
        edge_env = 2 * np.sqrt(eps) * np.abs(profile(eps * np.pi * cfg.K)[0])
        if edge_env > cfg.edge_tol * peak_env:
            raise DomainTooSmall(
                f"envelope at the box edge is {edge_env / peak_env:.2e} of the peak (limit {cfg.edge_tol:.1e}); increase K"
            )
    N, h = cfg.N, cfg.N // 2
    omega2 = params.omega2
    sigma = params.sigma
    Wx = potential.evaluate(x[h:])
    Wx = np.append(Wx, potential.evaluate(np.pi * cfg.K))
    D = _even_d2(cfg)

    def F(half):
        r = _pde_residual(_unfold(half, N), cfg, potential, omega2, eps, sigma, x)
        return _fold(r, N)

    def J(half):
        jac = D.copy()
        jac[np.diag_indices_from(jac)] += omega2 + eps * Wx - 3 * sigma * half**2
        return jac

    half0 = _fold(seed, N)
    out = newton(F, J, half0, cfg.tol, cfg.max_iter, norm=lambda r: float(np.max(np.abs(r), initial=0.0)), damped=True)
    return SolitonResult(GridField(x, _unfold(out.x, N)), out.iterations, out.residual, seed)


def _continuation_path(eps_values, max_ratio):
    path = []
    for e in sorted(set(float(v) for v in eps_values)):
        if path:
            steps = int(np.ceil(np.log(e / path[-1]) / np.log(max_ratio) - 1e-12))
            path.extend(path[-1] * (e / path[-1]) ** (np.arange(1, steps) / steps))
        path.append(e)
    return path


def soliton_sweep(eps_values, base, cfg, potential, max_ratio=1.5):
    """Solve along increasing ``eps`` by continuation; returns ``{eps: SolitonResult}``.

    ``base`` supplies ``n, w2n, Omega, sigma``.  The smallest ``eps`` starts
    from the coupled-mode field; every later point starts from the new
    coupled-mode field plus the previous correction scaled by
    ``(eps/eps_prev)^(3/2)``.  Intermediate points keep consecutive ratios at
    most ``max_ratio``.  Plain Newton from the coupled-mode seed can land on
    another even solution at moderate ``eps``; continuation stays on the
    branch that connects to the coupled-mode soliton.
    """
    if max_ratio <= 1:
        raise ValueError("max_ratio must exceed 1")
    if any(e <= 0 for e in eps_values):
        raise InvalidRegime("continuation needs eps > 0")
    x = cfg.grid()
    targets = set(float(v) for v in eps_values)
    out = {}
    prev = None
    for e in _continuation_path(eps_values, max_ratio):
        params = CoupledModeParams(base.n, base.w2n, base.Omega, base.sigma, e)
        lo = leading_order_field(SolitonProfile(params), x)
        seed = lo if prev is None else lo + (prev[1] - prev[2]) * (e / prev[0]) ** 1.5
        res = solve_soliton(params, cfg, potential, seed=seed)
        prev = (e, res.field.u, lo)
        if e in targets:
            out[e] = res
    return out


def _fold(full, N):
    """Samples at ``x = i dx``, ``i = 0..N/2`` (the last one is the box edge)."""
    h = N // 2
    return np.append(full[h:], full[0])


def error_vs_cm(U, profile, eps=None):
    """``sup_x |U(x) - sqrt(eps)(a(eps x) e^{inx/2} + conj(a)(eps x) e^{-inx/2})|``."""
    approx = leading_order_field(profile, U.x, eps)
    return float(np.max(np.abs(U.u - approx)))


def partition_diagnostic(U, params, r=2.0 / 3.0, c=2.0, q=0.0):
    """Weighted L1 mass of the transform near ``+-n/2`` and elsewhere.

    Windows are ``|k -+ n/2| <= (c/2) eps^r``; the default ``c = 2``,
    ``r = 2/3`` gives half-width ``eps^(2/3)``.
    """
    if not 0.5 < r < 1.0:
        raise ValueError("window exponent r must lie in (1/2, 1)")
    k, uhat = U.spectrum()
    dk = abs(k[1] - k[0])
    weight = (1 + k**2) ** (q / 2) * np.abs(uhat) * dk
    half_width = 0.5 * c * params.eps**r
    kn = params.n / 2
    plus = np.abs(k - kn) <= half_width
    minus = np.abs(k + kn) <= half_width
    zero = ~(plus | minus)
    return PartitionReport(float(weight[plus].sum()), float(weight[minus].sum()), float(weight[zero].sum()), half_width)


def residual_check(U, params, potential):
    """Discrete sup norm of the pseudo-spectral residual on the full grid."""
    x = U.x
    N = x.size
    dx = x[1] - x[0]
    k = 2 * np.pi * scipy.fft.fftfreq(N, dx)
    u = np.asarray(U.u, dtype=complex)
    d2 = scipy.fft.ifft(-(k**2) * scipy.fft.fft(u))
    r = d2 + (params.omega2 + params.eps * potential.evaluate(x)) * u - params.sigma * np.abs(u) ** 2 * u
    return float(np.max(np.abs(r), initial=0.0))
