"""The stationary coupled-mode system and its gap soliton.

    i n a' + Omega a + w b = sigma (|a|^2 + 2|b|^2) a
   -i n b' + Omega b + w a = sigma (2|a|^2 + |b|^2) b

with ``w = w_{2n}`` and derivatives in the slow variable ``y = eps x``.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import InvalidRegime

__all__ = [
    "CoupledModeParams",
    "SolitonProfile",
    "soliton_exact",
    "cme_residual",
    "cme_residual_fields",
    "dispersion_amplitude",
    "leading_order_field",
    "dirac_linearization",
    "dirac_symbol_eigenvalues",
    "kernel_vectors",
    "kernel_check",
    "richardson_derivative",
]


@dataclass(frozen=True)
class CoupledModeParams:
    n: int
    w2n: float
    Omega: float
    sigma: int = 1
    eps: float = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("resonance index n must be a positive integer")
        if self.w2n == 0:
            raise ValueError("w2n must be nonzero")
        if self.sigma not in (1, -1):
            raise ValueError("sigma must be +1 or -1")
        if self.eps < 0:
            raise ValueError("eps must be non-negative")

    @property
    def omega2(self):
        return self.n**2 / 4 + self.eps * self.Omega

    @property
    def kappa(self):
        return np.sqrt(max(self.w2n**2 - self.Omega**2, 0.0)) / self.n

    def soliton_regime(self):
        """True when the exponentially decaying gap soliton exists."""
        return self.sigma * self.w2n > 0 and abs(self.Omega) < abs(self.w2n)


def dispersion_amplitude(Omega, w2n, sigma, branch="+"):
    """Constant-amplitude root ``c`` of ``Omega +/- w - 3 sigma c^2 = 0``.

    Returns ``None`` when the radicand is negative (no such branch).
    """
    if branch not in ("+", "-"):
        raise ValueError("branch must be '+' or '-'")
    sign = 1.0 if branch == "+" else -1.0
    radicand = (Omega + sign * w2n) / (3.0 * sigma)
    if radicand < 0:
        return None
    return float(np.sqrt(radicand))


def _check_regime(params):
    if not params.soliton_regime():
        if abs(params.Omega) >= abs(params.w2n):
            raise InvalidRegime(
                f"|Omega| = {abs(params.Omega)} must lie strictly inside the gap |w2n| = {abs(params.w2n)}"
            )
        raise InvalidRegime("gap solitons need sigma * w2n > 0")


def _soliton_focusing(n, w, Omega, y):
    kappa = np.sqrt(w**2 - Omega**2) / n
    num = np.sqrt(2.0 / 3.0) * np.sqrt(w**2 - Omega**2)
    den = np.sqrt(w - Omega) * np.cosh(kappa * y) + 1j * np.sqrt(w + Omega) * np.sinh(kappa * y)
    return num / den


def soliton_exact(params, y):
    """Reversible homoclinic orbit ``(a(y), b(y))`` with ``b = conj(a)``.

    For ``sigma = +1, w > 0`` this is the closed form with
    ``kappa = sqrt(w^2 - Omega^2) / n``.  The defocusing case
    ``sigma = -1, w < 0`` is the complex conjugate of the focusing orbit at
    ``(-Omega, -w)``; conjugation with those sign flips maps solutions to
    solutions.
    """
    _check_regime(params)
    y = np.asarray(y, dtype=float)
    if params.sigma == 1:
        a = _soliton_focusing(params.n, params.w2n, params.Omega, y)
    else:
        a = np.conj(_soliton_focusing(params.n, -params.w2n, -params.Omega, y))
    return a, np.conj(a)


def soliton_derivative(params, y):
    """Closed-form ``(a'(y), b'(y))`` of the exact orbit."""
    _check_regime(params)
    y = np.asarray(y, dtype=float)
    sign = params.sigma
    n, w, Om = params.n, sign * params.w2n, sign * params.Omega
    kappa = np.sqrt(w**2 - Om**2) / n
    num = np.sqrt(2.0 / 3.0) * np.sqrt(w**2 - Om**2)
    den = np.sqrt(w - Om) * np.cosh(kappa * y) + 1j * np.sqrt(w + Om) * np.sinh(kappa * y)
    dden = kappa * (np.sqrt(w - Om) * np.sinh(kappa * y) + 1j * np.sqrt(w + Om) * np.cosh(kappa * y))
    da = -num * dden / den**2
    if sign == -1:
        da = np.conj(da)
    return da, np.conj(da)


@dataclass(frozen=True)
class SolitonProfile:
    params: CoupledModeParams

    def __post_init__(self):
        _check_regime(self.params)

    @property
    def kappa(self):
        return self.params.kappa

    def __call__(self, y):
        return soliton_exact(self.params, y)

    def derivative(self, y):
        return soliton_derivative(self.params, y)


def richardson_derivative(f, y, h=1e-3, levels=2):
    """Central differences with ``levels`` rounds of Richardson extrapolation."""
    y = np.asarray(y, dtype=float)
    table = []
    for j in range(levels + 1):
        hj = h / 2**j
        table.append((f(y + hj) - f(y - hj)) / (2 * hj))
    for k in range(1, levels + 1):
        factor = 4.0**k
        table = [(factor * table[j + 1] - table[j]) / (factor - 1) for j in range(len(table) - 1)]
    return table[0]


def cme_residual_fields(params, a, b, da, db):
    """Left minus right of both coupled-mode equations, pointwise."""
    n, w, Om, s = params.n, params.w2n, params.Omega, params.sigma
    ra = 1j * n * da + Om * a + w * b - s * (np.abs(a) ** 2 + 2 * np.abs(b) ** 2) * a
    rb = -1j * n * db + Om * b + w * a - s * (2 * np.abs(a) ** 2 + np.abs(b) ** 2) * b
    return ra, rb


def cme_residual(params, ys, profile=None, h=1e-3):
    """Max modulus of the coupled-mode residual of a profile on ``ys``.

    ``profile`` maps ``y -> (a, b)`` and defaults to the exact soliton.  The
    derivative is taken numerically (Richardson-extrapolated central
    differences), independent of the closed-form derivative.
    """
    if profile is None:
        profile = SolitonProfile(params)
    ys = np.asarray(ys, dtype=float)
    a, b = profile(ys)
    da = richardson_derivative(lambda t: profile(t)[0], ys, h)
    db = richardson_derivative(lambda t: profile(t)[1], ys, h)
    ra, rb = cme_residual_fields(params, a, b, da, db)
    return float(max(np.max(np.abs(ra), initial=0.0), np.max(np.abs(rb), initial=0.0)))


def leading_order_field(profile, xs, eps=None):
    """``sqrt(eps) (a(eps x) e^{inx/2} + conj(a(eps x)) e^{-inx/2})`` on ``xs``.

    Returned as real samples; the sum of a number and its conjugate is real.
    """
    p = profile.params
    eps = p.eps if eps is None else eps
    xs = np.asarray(xs, dtype=float)
    if eps == 0:
        return np.zeros_like(xs)
    a, _ = profile(eps * xs)
    return 2.0 * np.sqrt(eps) * np.real(a * np.exp(0.5j * p.n * xs))


def _d1_matrix(N, h, boundary):
    """Fourth-order central first derivative on a uniform grid."""
    offsets = [-2, -1, 1, 2]
    coeffs = np.array([1.0, -8.0, 8.0, -1.0]) / (12.0 * h)
    if boundary == "periodic":
        diags = []
        offs = []
        for o, c in zip(offsets, coeffs):
            diags += [np.full(N - abs(o), c), np.full(abs(o), c)]
            offs += [o, o - N if o > 0 else o + N]
        return sp.diags(diags, offs, shape=(N, N), format="csr")
    if boundary == "zero":
        return sp.diags([np.full(N - abs(o), c) for o, c in zip(offsets, coeffs)], offsets, shape=(N, N), format="csr")
    raise ValueError("boundary must be 'zero' or 'periodic'")


def dirac_linearization(profile, params, ys, boundary="zero"):
    """Linearization of the coupled-mode system about ``(a, b)``.

    Unknowns are ordered ``(da, conj da, db, conj db)``, each a block of grid
    values.  ``d/dy`` uses fourth-order central differences; the returned
    sparse matrix is Hermitian up to rounding.
    """
    ys = np.asarray(ys, dtype=float)
    N = ys.size
    h = ys[1] - ys[0]
    if not np.allclose(np.diff(ys), h, rtol=1e-9, atol=0):
        raise ValueError("grid must be uniform")
    if profile is None:
        a = np.zeros(N, dtype=complex)
        b = np.zeros(N, dtype=complex)
    else:
        a, b = profile(ys)
    n, w, Om, s = params.n, params.w2n, params.Omega, params.sigma
    ac, bc = np.conj(a), np.conj(b)
    wc = np.conj(w)
    W0 = Om - 2 * s * (np.abs(a) ** 2 + np.abs(b) ** 2)
    D = _d1_matrix(N, h, boundary)

    def dg(v):
        return sp.diags(np.broadcast_to(v, (N,)).astype(complex), 0, format="csr")

    plus = 1j * n * D + dg(W0)
    minus = -1j * n * D + dg(W0)
    blocks = [
        [plus, dg(-s * a**2), dg(w - 2 * s * a * bc), dg(-2 * s * a * b)],
        [dg(-s * ac**2), minus, dg(-2 * s * ac * bc), dg(wc - 2 * s * ac * b)],
        [dg(wc - 2 * s * ac * b), dg(-2 * s * a * b), minus, dg(-s * b**2)],
        [dg(-2 * s * ac * bc), dg(w - 2 * s * a * bc), dg(-s * bc**2), plus],
    ]
    return sp.bmat(blocks, format="csr")


def dirac_symbol_eigenvalues(params, p):
    """Eigenvalues of the linearization about zero at Fourier mode ``e^{ipy}``.

    Each 2x2 block ``[[Omega - n p, w], [w, Omega + n p]]`` gives
    ``Omega +/- sqrt(w^2 + n^2 p^2)``; both blocks share the spectrum.
    """
    root = np.sqrt(abs(params.w2n) ** 2 + (params.n * p) ** 2)
    return np.array([params.Omega - root, params.Omega - root, params.Omega + root, params.Omega + root])


def kernel_vectors(profile, ys):
    """Translation and gauge symmetry vectors in the ``(a, conj a, b, conj b)`` order."""
    a, b = profile(ys)
    da, db = profile.derivative(ys)
    translation = np.concatenate([da, np.conj(da), db, np.conj(db)])
    gauge = np.concatenate([1j * a, -1j * np.conj(a), 1j * b, -1j * np.conj(b)])
    return translation, gauge


def kernel_check(operator, profile, ys):
    """Relative residuals ``||A v|| / ||v||`` for both symmetry vectors."""
    out = []
    for v in kernel_vectors(profile, ys):
        out.append(float(np.linalg.norm(operator @ v) / np.linalg.norm(v)))
    return tuple(out)
