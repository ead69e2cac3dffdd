"""Fourier-series data model for the 1D problem.

A solution of period 4*pi is written ``U(x) = sqrt(eps) * sum_m U_m exp(i m x / 2)``
where ``m`` runs over one parity class (even numbers: 2*pi-periodic, odd
numbers: 2*pi-antiperiodic).  The potential ``W(x) = sum_m w_{2m} exp(i m x)``
lives on the even lattice of the same half-integer mode numbering, so the
coefficient at lattice index ``j`` is ``w_j`` (zero for odd ``j``).

Coefficients are stored densely, one slot per lattice point of the parity
class with ``|m| <= M``.  Convolutions are direct sums; results are truncated
back to ``|m| <= M``.
"""

import json
from dataclasses import dataclass
from types import MappingProxyType

import numpy as np
from scipy.signal import fftconvolve

__all__ = [
    "PotentialSpec",
    "LatticeField1D",
    "WeightedNorm",
    "convolve",
    "reverse_conjugate",
    "cubic_term",
    "weighted_norm",
    "synthesize",
    "banach_constant",
    "load_potential",
]


def _top(parity, M):
    """Largest lattice index of the given parity not exceeding M."""
    return M if M % 2 == parity else M - 1


class PotentialSpec:
    """Real, even, zero-mean potential ``W(x) = sum_m w_{2m} e^{imx}``.

    ``coeffs`` maps the harmonic number ``m`` to ``w_{2m}``.  Entries for
    negative ``m`` are filled in by mirroring; supplying both signs with
    different values, a complex value or a nonzero mean is an error.
    """

    def __init__(self, coeffs):
        full = {}
        for m, w in dict(coeffs).items():
            m = int(m)
            if np.iscomplexobj(w) and np.imag(w) != 0:
                raise ValueError(f"potential coefficient w_{2 * m} must be real")
            w = float(np.real(w))
            if m == 0:
                if w != 0.0:
                    raise ValueError("potential must have zero mean (w_0 = 0)")
                continue
            for key in (m, -m):
                if key in full and full[key] != w:
                    raise ValueError(f"potential is not even: w_{2 * m} != w_{-2 * m}")
                full[key] = w
        self._coeffs = MappingProxyType({m: w for m, w in sorted(full.items()) if w != 0.0})

    @classmethod
    def single(cls, m, w):
        """Pure cosine potential ``2 w cos(m x)``."""
        return cls({m: w})

    @property
    def coeffs(self):
        return self._coeffs

    @property
    def truncation(self):
        return max((abs(m) for m in self._coeffs), default=0)

    def __repr__(self):
        pos = {m: w for m, w in self._coeffs.items() if m > 0}
        return f"PotentialSpec({pos})"

    def __eq__(self, other):
        return isinstance(other, PotentialSpec) and dict(self._coeffs) == dict(other._coeffs)

    def __hash__(self):
        return hash(tuple(self._coeffs.items()))

    def w2(self, m):
        """``w_{2m}``."""
        return self._coeffs.get(int(m), 0.0)

    def lattice(self, j):
        """Coefficient at half-integer lattice index ``j`` (``w_j``)."""
        j = np.asarray(j)
        out = np.zeros(j.shape)
        even = j % 2 == 0
        for m, w in self._coeffs.items():
            out[even & (j == 2 * m)] = w
        return out

    def toeplitz(self, ms):
        """Matrix ``W[i, k] = w_{m_i - m_k}`` acting on coefficients at ``ms``."""
        ms = np.asarray(ms)
        return self.lattice(ms[:, None] - ms[None, :])

    def l1_norm(self):
        return float(sum(abs(w) for w in self._coeffs.values()))

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for m, w in self._coeffs.items():
            out += w * np.cos(m * x)
        return out

    def to_json(self):
        return {"coeffs": [{"m": m, "w": w} for m, w in self._coeffs.items() if m > 0]}


def load_potential(path):
    """Read a potential file ``{"coeffs": [{"m": int, "w": real}, ...]}``.

    Only ``m >= 1`` may be listed; mirroring and zero mean are applied on load.
    """
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or not isinstance(doc.get("coeffs"), list):
        raise ValueError(f"{path}: expected an object with a 'coeffs' list")
    coeffs = {}
    for entry in doc["coeffs"]:
        try:
            m, w = entry["m"], entry["w"]
        except (TypeError, KeyError):
            raise ValueError(f"{path}: each coefficient needs 'm' and 'w'") from None
        if not isinstance(m, int) or isinstance(m, bool) or m < 1:
            raise ValueError(f"{path}: 'm' must be a positive integer, got {m!r}")
        if not isinstance(w, (int, float)) or isinstance(w, bool):
            raise ValueError(f"{path}: 'w' must be a real number, got {w!r}")
        if m in coeffs:
            raise ValueError(f"{path}: duplicate coefficient m={m}")
        coeffs[m] = float(w)
    return PotentialSpec(coeffs)


@dataclass(frozen=True)
class WeightedNorm:
    """The ``l^2_s`` norm with weights ``(1 + |m|^2/4)^s``."""

    s: float

    def __post_init__(self):
        if self.s < 0:
            raise ValueError("weight exponent s must be non-negative")

    def is_algebra(self, dim=1):
        return self.s > dim / 2

    def __call__(self, field):
        return weighted_norm(field, self.s)


class LatticeField1D:
    """Truncated coefficients ``U_m`` on one parity class, ``|m| <= M``."""

    __slots__ = ("parity", "M", "coeffs")

    def __init__(self, parity, M, coeffs=None):
        parity = int(parity) % 2
        M = int(M)
        if M < parity:
            raise ValueError("truncation M must be at least 1 for the odd lattice")
        top = _top(parity, M)
        n = top + 1
        if coeffs is None:
            arr = np.zeros(n, dtype=complex)
        else:
            arr = np.array(coeffs, dtype=complex)
            if arr.shape != (n,):
                raise ValueError(f"expected {n} coefficients for parity {parity}, M={M}")
        arr.setflags(write=False)
        object.__setattr__(self, "parity", parity)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "coeffs", arr)

    def __setattr__(self, name, value):
        raise AttributeError("LatticeField1D is immutable")

    @classmethod
    def zeros(cls, parity, M):
        return cls(parity, M)

    @classmethod
    def from_dict(cls, parity, M, values):
        field = cls(parity, M)
        arr = np.zeros_like(field.coeffs)
        for m, v in values.items():
            arr[field.slot(m)] = v
        return cls(parity, M, arr)

    @classmethod
    def basis(cls, m, M):
        """The unit vector ``e_m``."""
        return cls.from_dict(m % 2, M, {m: 1.0})

    @property
    def top(self):
        return _top(self.parity, self.M)

    @property
    def indices(self):
        return np.arange(-self.top, self.top + 1, 2)

    def slot(self, m):
        m = int(m)
        if m % 2 != self.parity:
            raise ValueError(f"index {m} does not have parity {self.parity}")
        if abs(m) > self.top:
            raise IndexError(f"index {m} outside truncation M={self.M}")
        return (m + self.top) // 2

    def __getitem__(self, m):
        m = int(m)
        if m % 2 != self.parity or abs(m) > self.top:
            return 0j
        return complex(self.coeffs[(m + self.top) // 2])

    def __len__(self):
        return self.coeffs.size

    def as_dict(self, tol=0.0):
        return {int(m): complex(c) for m, c in zip(self.indices, self.coeffs) if abs(c) > tol}

    def with_coeffs(self, coeffs):
        return LatticeField1D(self.parity, self.M, coeffs)

    def _check_compatible(self, other):
        if not isinstance(other, LatticeField1D):
            return NotImplemented
        if other.parity != self.parity or other.M != self.M:
            raise ValueError("fields live on different lattices")
        return None

    def __add__(self, other):
        bad = self._check_compatible(other)
        if bad is NotImplemented:
            return bad
        return self.with_coeffs(self.coeffs + other.coeffs)

    def __sub__(self, other):
        bad = self._check_compatible(other)
        if bad is NotImplemented:
            return bad
        return self.with_coeffs(self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return self.with_coeffs(self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_coeffs(-self.coeffs)

    def norm(self, s=0.0):
        return weighted_norm(self, s)

    def is_real_symmetric(self, tol=1e-12):
        """True when ``U_{-m} = conj(U_m)``, i.e. ``U(x)`` is real."""
        return bool(np.max(np.abs(self.coeffs - np.conj(self.coeffs[::-1])), initial=0.0) <= tol)

    def resized(self, M):
        """Same coefficients on a different truncation (zero-pad or cut)."""
        out = LatticeField1D(self.parity, M)
        arr = np.zeros_like(out.coeffs)
        for i, m in enumerate(out.indices):
            arr[i] = self[m]
        return out.with_coeffs(arr)

    def __repr__(self):
        return f"LatticeField1D(parity={self.parity}, M={self.M}, nonzero={self.as_dict(1e-14)})"


def _truncate(full, lo, parity, M):
    """Cut a dense coefficient run starting at index ``lo`` (step 2) to ``|m| <= M``."""
    out = LatticeField1D(parity, M)
    idx = (out.indices - lo) // 2
    arr = np.zeros(len(out), dtype=complex)
    ok = (idx >= 0) & (idx < full.size)
    arr[ok] = full[idx[ok]]
    return out.with_coeffs(arr)


def _full_convolve(u, v):
    """Untruncated product of two dense runs; returned with its lowest index."""
    return np.convolve(u.coeffs, v.coeffs), -(u.top + v.top)


def convolve(U, V):
    """Truncated convolution ``(U * V)_m = sum_k U_k V_{m-k}``, ``|m| <= M``."""
    if U.M != V.M:
        raise ValueError(f"mismatched truncations: {U.M} vs {V.M}")
    full, lo = _full_convolve(U, V)
    return _truncate(full, lo, (U.parity + V.parity) % 2, U.M)


def reverse_conjugate(U):
    """``out_m = conj(U_{-m})``: coefficients of ``conj(U(x))``."""
    return U.with_coeffs(np.conj(U.coeffs[::-1]))


def cubic_term(U):
    """Coefficients of ``|U|^2 U``: ``U * R conj(U) * U`` truncated to ``|m| <= M``.

    The triple product is formed without intermediate truncation.
    """
    uc = U.coeffs
    full = np.convolve(np.convolve(uc, np.conj(uc[::-1])), uc)
    return _truncate(full, -3 * U.top, U.parity, U.M)


def weighted_norm(U, s):
    if s < 0:
        raise ValueError("s must be non-negative")
    m = U.indices
    weights = (1.0 + m**2 / 4.0) ** s
    return float(np.sqrt(np.sum(weights * np.abs(U.coeffs) ** 2)))


def synthesize(U, eps, xs):
    """Samples of ``sqrt(eps) * sum_m U_m exp(i m x / 2)`` on the points ``xs``."""
    if eps < 0:
        raise ValueError("eps must be non-negative")
    xs = np.asarray(xs, dtype=float)
    phase = np.exp(0.5j * np.multiply.outer(xs, U.indices))
    return np.sqrt(eps) * (phase @ U.coeffs)


def banach_constant(s, R, dim=1):
    """Algebra constant ``C(s)`` for supports inside the window ``|m_i| <= R``.

    By Cauchy-Schwarz,
    ``||U*V||_s^2 <= sup_m sum_k w(m) / (w(k) w(m-k)) * ||U||_s^2 ||V||_s^2``
    with ``w(m) = (1 + |m|^2/4)^s``.  The sum is a convolution of ``1/w`` with
    itself, evaluated here for every ``m`` reachable from the window.  The
    constant is valid for any truncation with all supports inside the window.
    """
    m = np.arange(-R, R + 1)
    if dim == 1:
        inv = (1.0 + m**2 / 4.0) ** (-s)
        sums = fftconvolve(inv, inv)
        mm = np.arange(-2 * R, 2 * R + 1)
        weight = (1.0 + mm**2 / 4.0) ** s
    elif dim == 2:
        m1, m2 = np.meshgrid(m, m, indexing="ij")
        inv = (1.0 + (m1**2 + m2**2) / 4.0) ** (-s)
        sums = fftconvolve(inv, inv)
        mm = np.arange(-2 * R, 2 * R + 1)
        mm1, mm2 = np.meshgrid(mm, mm, indexing="ij")
        weight = (1.0 + (mm1**2 + mm2**2) / 4.0) ** s
    else:
        raise ValueError("dim must be 1 or 2")
    return float(np.sqrt(np.max(weight * np.clip(sums, 0.0, None))))
