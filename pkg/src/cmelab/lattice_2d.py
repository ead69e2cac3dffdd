"""Two-dimensional lattice system and its resonant bifurcation equations.

Fields are ``U(x) = sqrt(eps) sum_m U_m exp(i m.x / 2)`` with
``m = (m1, m2)`` running over a product of parity classes.  The potential
``W(x) = sum_p w_{2p} exp(i p.x)`` sits on the even-even lattice.  Near
``omega^2 = |n|^2/4`` every mode of the resonant set ``S_n`` (all lattice
points with ``|m| = |n|``) is marginal, and the kernel amplitudes obey a
``|S_n|``-component algebraic system.
"""

from dataclasses import dataclass
from functools import cached_property
from types import MappingProxyType

import numpy as np
from scipy.signal import convolve2d

from .newton import newton

__all__ = [
    "ResonantSet2D",
    "resonant_set",
    "resonant_set_violations",
    "PotentialSpec2D",
    "LatticeField2D",
    "LatticeProblem2D",
    "convolve_2d",
    "cubic_term_2d",
    "residual_2d",
    "jacobian_2d",
    "solve_g_2d",
    "bifurcation_residual_2d",
    "cm4_residual",
    "CM4_ORDER",
]

# Component order of the four-mode system at n = (1, 1).
CM4_ORDER = ((1, 1), (-1, -1), (1, -1), (-1, 1))

COND_MAX = 1e12


def _pair(n):
    n1, n2 = (int(v) for v in n)
    return n1, n2


@dataclass(frozen=True)
class ResonantSet2D:
    n: tuple
    parity: tuple
    members: tuple

    @property
    def dim(self):
        return len(self.members)

    def index(self, m):
        return self.members.index(_pair(m))

    def as_dict(self):
        return {
            "n": list(self.n),
            "parity": ["odd" if p else "even" for p in self.parity],
            "members": [list(m) for m in self.members],
            "dim": self.dim,
        }


def resonant_set(n, R=None):
    """All ``m`` on the parity lattice of ``n`` with ``|m|^2 = |n|^2``.

    The search covers ``|m_i| <= R`` (default ``ceil(|n|)``), which is
    exhaustive because every member satisfies ``|m_i| <= |n|``.  Members
    are sorted lexicographically, except that ``S_(1,1)`` (and its sign
    images) uses the order ``(1,1), (-1,-1), (1,-1), (-1,1)`` of the
    four-mode system.
    """
    n = _pair(n)
    r2 = n[0] ** 2 + n[1] ** 2
    if R is None:
        R = int(np.ceil(np.sqrt(r2)))
    if R * R < r2:
        raise ValueError(f"search radius R={R} is smaller than |n|")
    parity = (n[0] % 2, n[1] % 2)
    axes = [np.arange(-R, R + 1) for _ in range(2)]
    axes = [a[a % 2 == p] for a, p in zip(axes, parity)]
    m1, m2 = np.meshgrid(*axes, indexing="ij")
    hit = m1**2 + m2**2 == r2
    members = sorted(zip(m1[hit].tolist(), m2[hit].tolist()))
    if set(members) == set(CM4_ORDER):
        members = list(CM4_ORDER)
    return ResonantSet2D(n, parity, tuple(tuple(m) for m in members))


def resonant_set_violations(rs):
    """Statements about the size of a resonant set that ``rs`` fails.

    Checks ``0 < dim``; ``dim = 1`` only for ``n = 0``; ``dim >= 2`` for
    ``(n1, 0)`` with ``n1`` odd and ``>= 4`` for even ``n1 != 0``; and for
    ``n1, n2 > 0``: ``dim >= 4`` when ``n1 - n2`` is odd, ``>= 8`` when it is
    even and nonzero.  Also checks membership of ``n``, parity conformance and
    closure under sign flips.  Returns an empty list when all hold.
    """
    out = []
    n1, n2 = rs.n
    d = rs.dim
    members = set(rs.members)
    if d <= 0:
        out.append("set is empty")
    if rs.n not in members:
        out.append("n is not a member")
    if any((m[0] - n1) % 2 or (m[1] - n2) % 2 for m in members):
        out.append("member with wrong parity")
    for s1 in (1, -1):
        for s2 in (1, -1):
            if {(s1 * a, s2 * b) for a, b in members} != members:
                out.append(f"not closed under sign map ({s1:+d}, {s2:+d})")
    if (n1, n2) == (0, 0) and members != {(0, 0)}:
        out.append("zero index must be the unique member")
    if n2 == 0 and n1 != 0:
        need = 2 if n1 % 2 else 4
        if d < need:
            out.append(f"dim {d} < {need} for n = ({n1}, 0)")
    if n1 > 0 and n2 > 0:
        diff = n1 - n2
        need = 4 if diff % 2 else (8 if diff != 0 else 0)
        if d < need:
            out.append(f"dim {d} < {need} for n = ({n1}, {n2})")
    return out


class PotentialSpec2D:
    """Real, even, zero-mean ``W(x) = sum_p w_{2p} e^{i p.x}``.

    ``coeffs`` maps harmonic pairs ``p`` to ``w_{2p}``; ``-p`` is filled in by
    mirroring.  Lattice index ``j`` (both components even) carries
    ``w_{j} = coeffs[j/2]``.
    """

    def __init__(self, coeffs):
        full = {}
        for p, w in dict(coeffs).items():
            p = _pair(p)
            if np.iscomplexobj(w) and np.imag(w) != 0:
                raise ValueError(f"potential coefficient at {p} must be real")
            w = float(np.real(w))
            if p == (0, 0):
                if w != 0.0:
                    raise ValueError("potential must have zero mean")
                continue
            for key in (p, (-p[0], -p[1])):
                if key in full and full[key] != w:
                    raise ValueError(f"conflicting values for harmonic {key}: W must be even")
                full[key] = w
        self._coeffs = {k: v for k, v in full.items() if v != 0.0}

    @classmethod
    def from_cm4(cls, w22=0.0, w02=0.0, w20=0.0, w2m2=0.0):
        """Potential carrying exactly the couplings of the four-mode system."""
        return cls({(1, 1): w22, (0, 1): w02, (1, 0): w20, (1, -1): w2m2})

    @property
    def coeffs(self):
        return MappingProxyType(self._coeffs)

    @property
    def truncation(self):
        return max((max(abs(p[0]), abs(p[1])) for p in self._coeffs), default=0)

    def lattice(self, j):
        """Coefficient ``w_j`` at lattice index ``j``."""
        j = _pair(j)
        if j[0] % 2 or j[1] % 2:
            return 0.0
        return self._coeffs.get((j[0] // 2, j[1] // 2), 0.0)

    def dense(self):
        """Coefficients on lattice indices ``-2T..2T`` (step 2) in both axes."""
        T = self.truncation
        arr = np.zeros((2 * T + 1, 2 * T + 1))
        for (p1, p2), w in self._coeffs.items():
            arr[p1 + T, p2 + T] = w
        return arr, T

    def evaluate(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        out = np.zeros(np.broadcast(x1, x2).shape)
        for (p1, p2), w in self._coeffs.items():
            out = out + w * np.cos(p1 * x1 + p2 * x2)
        return out

    def __repr__(self):
        return f"PotentialSpec2D({dict(sorted(self._coeffs.items()))})"


def _top(parity, M):
    return M if M % 2 == parity else M - 1


class LatticeField2D:
    """Truncated coefficients ``U_m`` on a product of parity classes, ``|m_i| <= M``."""

    __slots__ = ("parity", "M", "coeffs")

    def __init__(self, parity, M, coeffs=None):
        parity = (int(parity[0]) % 2, int(parity[1]) % 2)
        M = int(M)
        if M < max(parity):
            raise ValueError("truncation M must be at least 1 for an odd lattice")
        shape = tuple(_top(p, M) + 1 for p in parity)
        if coeffs is None:
            arr = np.zeros(shape, dtype=complex)
        else:
            arr = np.array(coeffs, dtype=complex)
            if arr.shape != shape:
                raise ValueError(f"expected coefficient array of shape {shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "parity", parity)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "coeffs", arr)

    def __setattr__(self, name, value):
        raise AttributeError("LatticeField2D is immutable")

    @classmethod
    def from_dict(cls, parity, M, values):
        field = cls(parity, M)
        arr = np.zeros_like(field.coeffs)
        for m, v in values.items():
            arr[field.slot(m)] = v
        return cls(parity, M, arr)

    @property
    def tops(self):
        return tuple(_top(p, self.M) for p in self.parity)

    def axis(self, i):
        t = self.tops[i]
        return np.arange(-t, t + 1, 2)

    def slot(self, m):
        m = _pair(m)
        for mi, p, t in zip(m, self.parity, self.tops):
            if mi % 2 != p:
                raise ValueError(f"index {m} does not match parity {self.parity}")
            if abs(mi) > t:
                raise IndexError(f"index {m} outside truncation M={self.M}")
        return tuple((mi + t) // 2 for mi, t in zip(m, self.tops))

    def __getitem__(self, m):
        try:
            return complex(self.coeffs[self.slot(m)])
        except (ValueError, IndexError):
            return 0j

    def with_coeffs(self, coeffs):
        return LatticeField2D(self.parity, self.M, coeffs)

    def __add__(self, other):
        if not isinstance(other, LatticeField2D):
            return NotImplemented
        if other.parity != self.parity or other.M != self.M:
            raise ValueError("fields live on different lattices")
        return self.with_coeffs(self.coeffs + other.coeffs)

    def __mul__(self, scalar):
        return self.with_coeffs(self.coeffs * scalar)

    __rmul__ = __mul__

    def norm(self, s=0.0):
        """``l^2_s`` norm with weights ``(1 + |m|^2/4)^s``."""
        m1, m2 = np.meshgrid(self.axis(0), self.axis(1), indexing="ij")
        w = (1.0 + (m1**2 + m2**2) / 4.0) ** s
        return float(np.sqrt(np.sum(w * np.abs(self.coeffs) ** 2)))

    def __repr__(self):
        nz = {tuple(int(v) for v in m): complex(c) for m, c in self._items() if abs(c) > 1e-14}
        return f"LatticeField2D(parity={self.parity}, M={self.M}, nonzero={nz})"

    def _items(self):
        for i, m1 in enumerate(self.axis(0)):
            for j, m2 in enumerate(self.axis(1)):
                yield (m1, m2), self.coeffs[i, j]


def _cut(full, lo, parity, M):
    """Truncate a dense run whose first entry sits at lattice index ``lo``."""
    out = LatticeField2D(parity, M)
    i = (out.axis(0) - lo[0]) // 2
    j = (out.axis(1) - lo[1]) // 2
    arr = np.zeros(out.coeffs.shape, dtype=complex)
    oi = (i >= 0) & (i < full.shape[0])
    oj = (j >= 0) & (j < full.shape[1])
    arr[np.ix_(oi, oj)] = full[np.ix_(i[oi], j[oj])]
    return out.with_coeffs(arr)


def convolve_2d(U, V):
    """Truncated ``(U * V)_m = sum_k U_k V_{m-k}``."""
    if U.M != V.M:
        raise ValueError(f"mismatched truncations: {U.M} vs {V.M}")
    full = convolve2d(U.coeffs, V.coeffs)
    lo = tuple(-(a + b) for a, b in zip(U.tops, V.tops))
    parity = tuple((a + b) % 2 for a, b in zip(U.parity, V.parity))
    return _cut(full, lo, parity, U.M)


def cubic_term_2d(U):
    """``U * R conj(U) * U`` without intermediate truncation, then cut to ``M``."""
    u = U.coeffs
    full = convolve2d(convolve2d(u, np.conj(u[::-1, ::-1])), u)
    lo = tuple(-3 * t for t in U.tops)
    return _cut(full, lo, U.parity, U.M)


def _potential_product(U, potential):
    w, T = potential.dense()
    full = convolve2d(U.coeffs, w)
    lo = tuple(-(t + 2 * T) for t in U.tops)
    return _cut(full, lo, U.parity, U.M)


def residual_2d(U, omega2, eps, sigma, potential):
    """``(omega^2 - |m|^2/4) U_m + eps (W*U)_m - eps sigma (U * R conj U * U)_m``."""
    m1, m2 = np.meshgrid(U.axis(0), U.axis(1), indexing="ij")
    diag = omega2 - (m1**2 + m2**2) / 4.0
    r = diag * U.coeffs + eps * _potential_product(U, potential).coeffs
    r = r - eps * sigma * cubic_term_2d(U).coeffs
    return U.with_coeffs(r)


@dataclass(frozen=True)
class LatticeProblem2D:
    """The 2D lattice system at ``omega^2 = |n|^2/4 + eps Omega``."""

    potential: PotentialSpec2D
    n: tuple
    Omega: float
    eps: float
    sigma: int = 1
    M: int = 9

    def __post_init__(self):
        object.__setattr__(self, "n", _pair(self.n))
        if self.sigma not in (1, -1):
            raise ValueError("sigma must be +1 or -1")
        if self.M < 3 * max(abs(self.n[0]), abs(self.n[1]), 1):
            raise ValueError(f"truncation M={self.M} cannot hold the cubic harmonics of n={self.n}")
        if self.M > 12:
            raise ValueError("dense 2D solves are limited to M <= 12")

    @property
    def parity(self):
        return (self.n[0] % 2, self.n[1] % 2)

    @property
    def omega2(self):
        return (self.n[0] ** 2 + self.n[1] ** 2) / 4.0 + self.eps * self.Omega

    @cached_property
    def resonant(self):
        return resonant_set(self.n)

    def zeros(self):
        return LatticeField2D(self.parity, self.M)

    @cached_property
    def flat_indices(self):
        f = self.zeros()
        m1, m2 = np.meshgrid(f.axis(0), f.axis(1), indexing="ij")
        return m1.ravel(), m2.ravel()

    @cached_property
    def kernel_slots(self):
        f = self.zeros()
        shape = f.coeffs.shape
        return np.array([np.ravel_multi_index(f.slot(m), shape) for m in self.resonant.members])

    @cached_property
    def complement_slots(self):
        return np.setdiff1d(np.arange(self.zeros().coeffs.size), self.kernel_slots)


def jacobian_2d(U, problem):
    """Real Jacobian of :func:`residual_2d` in ``(Re U, Im U)`` (row-major flattening)."""
    P = problem
    m1, m2 = P.flat_indices
    u = U.coeffs
    t1, t2 = U.tops
    s_full = convolve2d(u, np.conj(u[::-1, ::-1]))  # lowest index -2t
    q_full = convolve2d(u, u)
    d1 = (m1[:, None] - m1[None, :] + 2 * t1) // 2
    d2 = (m2[:, None] - m2[None, :] + 2 * t2) // 2
    a1 = (m1[:, None] + m1[None, :] + 2 * t1) // 2
    a2 = (m2[:, None] + m2[None, :] + 2 * t2) // 2
    wmat = np.vectorize(lambda i, j: P.potential.lattice((i, j)))(
        m1[:, None] - m1[None, :], m2[:, None] - m2[None, :]
    )
    diag = P.omega2 - (m1**2 + m2**2) / 4.0
    A = np.diag(diag).astype(complex) + P.eps * wmat - 2 * P.eps * P.sigma * s_full[d1, d2]
    B = -P.eps * P.sigma * q_full[a1, a2]
    return np.block([[np.real(A + B), -np.imag(A - B)], [np.imag(A + B), np.real(A - B)]])


def _with_kernel(a, g_flat, P):
    u = np.array(g_flat, dtype=complex)
    u[P.kernel_slots] = a
    return P.zeros().with_coeffs(u.reshape(P.zeros().coeffs.shape))


def solve_g_2d(a, problem, tol=1e-13, max_iter=50):
    """Complement component ``g`` (zero on ``S_n``) for kernel amplitudes ``a``.

    ``a`` follows the order of ``problem.resonant.members``.  Newton from
    ``g = 0`` on the equations off ``S_n``.
    """
    P = problem
    a = np.asarray(a, dtype=complex)
    if a.shape != (P.resonant.dim,):
        raise ValueError(f"expected {P.resonant.dim} amplitudes")
    size = P.zeros().coeffs.size
    comp = P.complement_slots
    rows = np.concatenate([comp, comp + size])

    def full(x):
        g = np.zeros(size, dtype=complex)
        g[comp] = x[: comp.size] + 1j * x[comp.size :]
        return _with_kernel(a, g, P)

    def F(x):
        r = residual_2d(full(x), P.omega2, P.eps, P.sigma, P.potential).coeffs.ravel()[comp]
        return np.concatenate([r.real, r.imag])

    def J(x):
        return jacobian_2d(full(x), P)[np.ix_(rows, rows)]

    out = newton(F, J, np.zeros(2 * comp.size), tol, max_iter, cond_max=COND_MAX)
    g = np.zeros(size, dtype=complex)
    g[comp] = out.x[: comp.size] + 1j * out.x[comp.size :]
    return P.zeros().with_coeffs(g.reshape(P.zeros().coeffs.shape))


def bifurcation_residual_2d(a, problem, g=None):
    """Kernel projections ``Omega a_j + (W*U)_{m_j} - sigma N_{m_j}`` at ``U = sum a_j e_{m_j} + g``.

    The lattice residual on ``S_n`` divided by ``eps``; at ``eps = 0`` it
    is the ``|S_n|``-component coupled-mode algebra.
    """
    P = problem
    if g is None:
        g = solve_g_2d(a, P)
    U = _with_kernel(np.asarray(a, dtype=complex), g.coeffs.ravel(), P)
    wu = _potential_product(U, P.potential).coeffs.ravel()[P.kernel_slots]
    nl = cubic_term_2d(U).coeffs.ravel()[P.kernel_slots]
    return P.Omega * np.asarray(a, dtype=complex) + wu - P.sigma * nl


def cm4_residual(a, Omega, sigma, w22=0.0, w02=0.0, w20=0.0, w2m2=0.0, w00=0.0):
    """Left minus right of the four-mode system at ``n = (1, 1)``.

    Components follow :data:`CM4_ORDER`.  The potential is even, so
    ``w_{-p} = w_p`` for each coupling.
    """
    a1, a2, a3, a4 = (complex(v) for v in a)
    p = [abs(v) ** 2 for v in (a1, a2, a3, a4)]
    tot = 2 * sum(p)
    base = Omega + w00
    r1 = base * a1 + w22 * a2 + w02 * a3 + w20 * a4 - sigma * ((tot - p[0]) * a1 + 2 * np.conj(a2) * a3 * a4)
    r2 = base * a2 + w22 * a1 + w20 * a3 + w02 * a4 - sigma * ((tot - p[1]) * a2 + 2 * np.conj(a1) * a3 * a4)
    r3 = base * a3 + w2m2 * a4 + w02 * a1 + w20 * a2 - sigma * ((tot - p[2]) * a3 + 2 * np.conj(a4) * a1 * a2)
    r4 = base * a4 + w2m2 * a3 + w20 * a1 + w02 * a2 - sigma * ((tot - p[3]) * a4 + 2 * np.conj(a3) * a1 * a2)
    return np.array([r1, r2, r3, r4])
