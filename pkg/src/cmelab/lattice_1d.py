"""The 1D Fourier lattice system and its Lyapunov-Schmidt split.

For each lattice index ``m`` of one parity class the residual is

    (omega^2 - m^2/4) U_m + eps (W * U)_m - eps sigma N(U, conj U, U)_m

Near the resonance ``omega^2 = n^2/4 + eps Omega`` the two kernel modes
``m = +-n`` are split off: ``U = a e_n + b e_{-n} + g`` with ``g_{+-n} = 0``.
``solve_g`` solves the complement equations for ``g`` at fixed ``(a, b)``;
``bifurcation_residual`` evaluates the two kernel projections.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .coupled_mode import dispersion_amplitude
from .errors import BranchNotPresent
from .fourier_core import LatticeField1D, PotentialSpec, cubic_term, synthesize
from .newton import newton

__all__ = [
    "LatticeProblem1D",
    "BifurcationState",
    "PeriodicBranch",
    "residual",
    "jacobian",
    "newton_solve",
    "solve_lattice",
    "symmetry_basis",
    "solve_g",
    "bifurcation_residual",
    "bifurcation_remainder",
    "bifurcation_state",
    "gap_edges",
    "periodic_branch",
    "sup_deviation",
]

COND_MAX = 1e12


@dataclass(frozen=True)
class LatticeProblem1D:
    potential: PotentialSpec
    omega2: float
    eps: float
    sigma: int
    parity: int
    M: int
    Omega: float | None = field(default=None)

    def __post_init__(self):
        if self.sigma not in (1, -1):
            raise ValueError("sigma must be +1 or -1")
        if self.eps < 0:
            raise ValueError("eps must be non-negative")
        object.__setattr__(self, "parity", int(self.parity) % 2)

    @classmethod
    def at_resonance(cls, potential, n, Omega, eps, sigma=1, M=None):
        """Problem with ``omega^2 = n^2/4 + eps Omega`` on the parity class of ``n``."""
        if M is None:
            M = default_truncation(n)
        if M < 3 * n:
            raise ValueError(f"truncation M={M} cannot represent the 3n harmonic (n={n})")
        return cls(potential, n**2 / 4 + eps * Omega, eps, sigma, n % 2, M, Omega)

    def detuning(self, n):
        """``Omega = (omega^2 - n^2/4) / eps``."""
        if self.Omega is not None:
            return self.Omega
        if self.eps == 0:
            raise ValueError("detuning undefined at eps = 0; construct with at_resonance")
        return (self.omega2 - n**2 / 4) / self.eps

    @cached_property
    def indices(self):
        return LatticeField1D(self.parity, self.M).indices

    @cached_property
    def diagonal(self):
        return self.omega2 - self.indices.astype(float) ** 2 / 4

    @cached_property
    def wmatrix(self):
        return self.potential.toeplitz(self.indices)

    def zeros(self):
        return LatticeField1D(self.parity, self.M)

    def resonance_distance(self):
        """``min_m |omega^2 - m^2/4|`` over the lattice."""
        return float(np.min(np.abs(self.diagonal)))

    def is_off_resonance(self):
        """``min_m |omega^2 - m^2/4| >= 10 eps sum_m |w_2m|`` (sum over both signs)."""
        return self.resonance_distance() >= 10 * self.eps * self.potential.l1_norm()


def default_truncation(n):
    return 8 * n + 8


def _check(U, P):
    if U.parity != P.parity or U.M != P.M:
        raise ValueError("field does not live on the problem lattice")


def residual(U, P):
    """Residual of the lattice system as a field on the problem lattice."""
    _check(U, P)
    u = U.coeffs
    r = P.diagonal * u + P.eps * (P.wmatrix @ u) - P.eps * P.sigma * cubic_term(U).coeffs
    return U.with_coeffs(r)


def _to_real(z):
    return np.concatenate([z.real, z.imag])


def _to_complex(x):
    d = x.size // 2
    return x[:d] + 1j * x[d:]


def _complex_derivatives(u, top, diagonal, wmatrix, eps, sigma, indices):
    """``dF = A dU + B d(conj U)`` for the lattice residual at ``u``."""
    rconj = np.conj(u[::-1])
    s_full = np.convolve(u, rconj)  # |U|^2, lowest index -2*top
    t_full = np.convolve(u, u)  # U^2, lowest index -2*top
    diff = (indices[:, None] - indices[None, :] + 2 * top) // 2
    summ = (indices[:, None] + indices[None, :] + 2 * top) // 2
    A = np.diag(diagonal).astype(complex) + eps * wmatrix - eps * sigma * 2 * s_full[diff]
    B = -eps * sigma * t_full[summ]
    return A, B


def _realify(A, B):
    return np.block([[np.real(A + B), -np.imag(A - B)], [np.imag(A + B), np.real(A - B)]])


def jacobian(U, P):
    """Real Jacobian in the coordinates ``(Re U, Im U)`` (dense ``2d x 2d``)."""
    _check(U, P)
    A, B = _complex_derivatives(U.coeffs, U.top, P.diagonal, P.wmatrix, P.eps, P.sigma, P.indices)
    return _realify(A, B)


def symmetry_basis(P, symmetry):
    """Orthonormal basis (real coordinates) of an invariant subspace.

    ``"none"``: everything.  ``"cos"``: ``U_m = U_{-m}`` real, i.e. ``U(x)``
    real and even.  ``"sin"``: ``U_m = -U_{-m}`` imaginary, i.e. ``U(x)``
    real and odd.
    """
    d = P.indices.size
    if symmetry == "none":
        return None
    top = P.indices[-1]
    cols = []
    for m in P.indices[P.indices >= 0]:
        i, j = (m + top) // 2, (-m + top) // 2
        col = np.zeros(2 * d)
        if symmetry == "cos":
            if m == 0:
                col[i] = 1.0
            else:
                col[i] = col[j] = np.sqrt(0.5)
        elif symmetry == "sin":
            if m == 0:
                continue
            col[d + i] = np.sqrt(0.5)
            col[d + j] = -np.sqrt(0.5)
        else:
            raise ValueError(f"unknown symmetry {symmetry!r}")
        cols.append(col)
    return np.array(cols).T


@dataclass
class LatticeSolution:
    field: LatticeField1D
    iterations: int
    residual: float


def solve_lattice(U0, P, tol=1e-12, max_iter=50, symmetry="none", cond_max=COND_MAX):
    """Newton iteration for ``residual(U, P) = 0``; see :func:`newton_solve`."""
    _check(U0, P)

    def F(x):
        return _to_real(residual(U0.with_coeffs(_to_complex(x)), P).coeffs)

    def J(x):
        return jacobian(U0.with_coeffs(_to_complex(x)), P)

    out = newton(F, J, _to_real(U0.coeffs), tol, max_iter, cond_max=cond_max, basis=symmetry_basis(P, symmetry))
    return LatticeSolution(U0.with_coeffs(_to_complex(out.x)), out.iterations, out.residual)


def newton_solve(U0, P, tol=1e-12, max_iter=50, symmetry="none"):
    """Newton's method on the lattice system in real coordinates.

    Converges when the l2 norm of the residual is at most ``tol``.  With
    ``symmetry`` other than ``"none"`` the start and every iterate are
    projected onto the symmetric subspace.  Raises ``SingularJacobian`` when
    the Jacobian condition number exceeds ``1e12`` and ``NoConvergence`` after
    ``max_iter`` steps.
    """
    return solve_lattice(U0, P, tol, max_iter, symmetry).field


def _kernel_split(P, n):
    idx = P.indices
    if n % 2 != P.parity:
        raise ValueError(f"resonance index {n} does not match lattice parity {P.parity}")
    if 3 * n > P.M:
        raise ValueError(f"truncation M={P.M} cannot represent the 3n harmonic (n={n})")
    top = idx[-1]
    kern = np.array([(n + top) // 2, (-n + top) // 2])
    comp = np.setdiff1d(np.arange(idx.size), kern)
    return kern, comp


def _assemble(a, b, g_comp, P, n):
    kern, comp = _kernel_split(P, n)
    u = np.zeros(P.indices.size, dtype=complex)
    u[comp] = g_comp
    u[kern[0]] = a
    u[kern[1]] = b
    return u


@dataclass
class BifurcationState:
    a: complex
    b: complex
    g: LatticeField1D

    def field(self, n):
        return self.g + LatticeField1D.from_dict(self.g.parity, self.g.M, {n: self.a, -n: self.b})


def solve_g(a, b, P, n, tol=1e-13, max_iter=50):
    """Complement component ``g`` (``g_{+-n} = 0``) at fixed kernel amplitudes.

    Newton from ``g = 0`` on the equations ``m != +-n`` of the lattice system.
    """
    kern, comp = _kernel_split(P, n)
    zero = P.zeros()
    rows = np.concatenate([comp, comp + P.indices.size])

    def full(x):
        return _assemble(a, b, _to_complex(x), P, n)

    def F(x):
        return _to_real(residual(zero.with_coeffs(full(x)), P).coeffs[comp])

    def J(x):
        Jfull = jacobian(zero.with_coeffs(full(x)), P)
        return Jfull[np.ix_(rows, rows)]

    out = newton(F, J, np.zeros(2 * comp.size), tol, max_iter, cond_max=COND_MAX)
    return zero.with_coeffs(_assemble(0.0, 0.0, _to_complex(out.x), P, n))


def bifurcation_state(a, b, P, n, **kw):
    return BifurcationState(complex(a), complex(b), solve_g(a, b, P, n, **kw))


def _projections(a, b, g, P, n):
    kern, _ = _kernel_split(P, n)
    u = g.coeffs.copy()
    u[kern[0]] = a
    u[kern[1]] = b
    U = g.with_coeffs(u)
    Omega = P.detuning(n)
    wu = P.wmatrix[kern] @ u
    N = cubic_term(U).coeffs[kern]
    res_a = Omega * a + wu[0] - P.sigma * N[0]
    res_b = Omega * b + wu[1] - P.sigma * N[1]
    return complex(res_a), complex(res_b)


def bifurcation_residual(a, b, P, n, g=None):
    """The two kernel projections at ``U = a e_n + b e_{-n} + G(a, b)``.

    Equals ``(Omega a + (W*U)_n - sigma N_n, Omega b + (W*U)_{-n} - sigma N_{-n})``,
    i.e. the lattice residual at ``+-n`` divided by ``eps`` (well defined at
    ``eps = 0``, where ``g = 0`` and the coupled-mode algebra is recovered).
    """
    if g is None:
        g = solve_g(a, b, P, n)
    return _projections(a, b, g, P, n)


def bifurcation_remainder(a, b, P, n, g=None):
    """The correction terms ``(A_eps, B_eps)`` with
    ``Omega a + w b - sigma(|a|^2 + 2|b|^2) a = eps A_eps`` on solutions.

    Computed as ``(cme_left - bifurcation_residual) / eps``.
    """
    if P.eps == 0:
        raise ValueError("remainder is defined for eps > 0")
    Omega = P.detuning(n)
    w = P.potential.w2(n)
    s = P.sigma
    la = Omega * a + w * b - s * (abs(a) ** 2 + 2 * abs(b) ** 2) * a
    lb = Omega * b + w * a - s * (2 * abs(a) ** 2 + abs(b) ** 2) * b
    ra, rb = bifurcation_residual(a, b, P, n, g)
    return (la - ra) / P.eps, (lb - rb) / P.eps


def gap_edges(n, eps, potential):
    """Leading-order band edges in ``omega^2``: ``n^2/4 -+ eps |w_2n|``."""
    if eps < 0:
        raise ValueError("eps must be non-negative")
    half = eps * abs(potential.w2(n))
    return n**2 / 4 - half, n**2 / 4 + half


def sup_deviation(U, eps, a, b, n, samples=4096):
    """``sup_x |U(x) - sqrt(eps)(a e^{inx/2} + b e^{-inx/2})|`` over one 4*pi period."""
    diff = U - LatticeField1D.from_dict(U.parity, U.M, {n: a, -n: b})
    xs = np.linspace(0.0, 4 * np.pi, samples, endpoint=False)
    return float(np.max(np.abs(synthesize(diff, eps, xs))))


@dataclass
class PeriodicBranch:
    field: LatticeField1D
    c: float
    a: complex
    b: complex
    eps: float
    n: int
    iterations: int
    residual: float

    @property
    def amplitude(self):
        """Physical amplitude ``sqrt(eps) |U_n|`` of the resonant mode."""
        return float(np.sqrt(self.eps) * abs(self.field[self.n]))

    @property
    def deviation(self):
        """Sup-norm distance from the constant coupled-mode approximation."""
        return sup_deviation(self.field, self.eps, self.a, self.b, self.n)


def periodic_branch(n, Omega, sigma, eps, branch, potential, M=None, tol=1e-12, max_iter=50):
    """Periodic (even n) or antiperiodic (odd n) solution bifurcating from the dispersion relation.

    The ``"+"`` branch is seeded with ``a = b = c`` and solved among real even
    fields; the ``"-"`` branch with ``a = i c, b = -i c`` (the gauge rotation of
    ``a = -b = c`` that keeps ``b = conj(a)``) among real odd fields.
    """
    w = potential.w2(n)
    c = dispersion_amplitude(Omega, w, sigma, branch)
    if c is None or c == 0.0:
        raise BranchNotPresent(f"no nontrivial '{branch}' branch at Omega={Omega}, w_2n={w}, sigma={sigma}")
    P = LatticeProblem1D.at_resonance(potential, n, Omega, eps, sigma, M)
    if branch == "+":
        a, b, symmetry = complex(c), complex(c), "cos"
    else:
        a, b, symmetry = 1j * c, -1j * c, "sin"
    U0 = LatticeField1D.from_dict(P.parity, P.M, {n: a, -n: b})
    sol = solve_lattice(U0, P, tol, max_iter, symmetry)
    return PeriodicBranch(sol.field, c, a, b, eps, n, sol.iterations, sol.residual)
