import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmelab.errors import BranchNotPresent, SingularJacobian
from cmelab.fourier_core import LatticeField1D, PotentialSpec, reverse_conjugate, synthesize
from cmelab.lattice_1d import (
    LatticeProblem1D,
    bifurcation_remainder,
    bifurcation_residual,
    gap_edges,
    jacobian,
    newton_solve,
    periodic_branch,
    residual,
    solve_g,
    symmetry_basis,
)
from oracles import fd_jacobian

POT = PotentialSpec({1: 0.5})
POT2 = PotentialSpec({1: 0.5, 2: 0.3, 3: -0.1})


def split(U):
    return np.concatenate([U.coeffs.real, U.coeffs.imag])


def join(P, x):
    d = x.size // 2
    return P.zeros().with_coeffs(x[:d] + 1j * x[d:])


def random_field(rng, P, scale=1.0):
    f = P.zeros()
    return f.with_coeffs(scale * (rng.normal(size=len(f)) + 1j * rng.normal(size=len(f))))


def test_residual_trivial_cases():
    P = LatticeProblem1D(POT, 0.25, 0.0, 1, 1, 9)
    assert residual(P.zeros(), P).norm() == 0
    kern = LatticeField1D.from_dict(1, 9, {1: 0.3 + 0.1j, -1: -0.2})
    assert residual(kern, P).norm() == 0
    r = residual(LatticeField1D.from_dict(1, 9, {3: 1.0}), P)
    assert r[3] == pytest.approx(-2.0)


def test_jacobian_at_zero_is_linear_part():
    P = LatticeProblem1D.at_resonance(POT2, 1, 0.3, 0.1)
    J = jacobian(P.zeros(), P)
    L = np.diag(P.diagonal) + P.eps * P.wmatrix
    d = P.indices.size
    np.testing.assert_allclose(J[:d, :d], L)
    np.testing.assert_allclose(J[d:, d:], L)
    assert np.max(np.abs(J[:d, d:])) == 0 and np.max(np.abs(J[d:, :d])) == 0
    # the couplings sit at lattice offsets 2, 4, 6
    i = (1 + P.indices[-1]) // 2
    assert J[i, i + 1] == pytest.approx(0.1 * 0.5)


@pytest.mark.parametrize("parity,sigma", [(0, 1), (1, -1)])
def test_jacobian_matches_finite_differences(parity, sigma):
    rng = np.random.default_rng(7 + parity)
    P = LatticeProblem1D(POT2, 0.37, 0.2, sigma, parity, 11)
    U = random_field(rng, P, 0.4)
    J = jacobian(U, P)
    Jfd = fd_jacobian(lambda x: split(residual(join(P, x), P)), split(U))
    assert np.max(np.abs(J - Jfd)) <= 1e-6


def test_jacobian_commutes_with_realness_projection():
    rng = np.random.default_rng(11)
    P = LatticeProblem1D(POT2, 0.3, 0.2, 1, 1, 9)
    U = random_field(rng, P)
    U = (U + reverse_conjugate(U)) * 0.5
    J = jacobian(U, P)
    d = P.indices.size
    # x -> split((V + R conj V) / 2) as a real matrix
    Pi = np.array([split((join(P, e) + reverse_conjugate(join(P, e))) * 0.5) for e in np.eye(2 * d)]).T
    np.testing.assert_allclose(Pi @ J, J @ Pi, atol=1e-12)


def test_symmetry_bases_are_orthonormal_and_invariant():
    P = LatticeProblem1D(POT2, 0.3, 0.2, 1, 0, 8)
    rng = np.random.default_rng(2)
    for kind in ("cos", "sin"):
        B = symmetry_basis(P, kind)
        np.testing.assert_allclose(B.T @ B, np.eye(B.shape[1]), atol=1e-14)
        U = join(P, B @ rng.normal(size=B.shape[1]) * 0.3)
        r = split(residual(U, P))
        assert np.linalg.norm(r - B @ (B.T @ r)) <= 1e-13


def test_newton_off_resonance_finds_zero():
    P = LatticeProblem1D(POT, 0.3, 0.05, 1, 0, 16)
    rng = np.random.default_rng(5)
    for _ in range(10):
        U0 = random_field(rng, P)
        U0 = U0 * (0.1 / U0.norm())
        assert newton_solve(U0, P).norm() <= 1e-10


def test_newton_at_kernel_with_zero_eps():
    P = LatticeProblem1D(POT, 0.25, 0.0, 1, 1, 9)
    U0 = LatticeField1D.from_dict(1, 9, {1: 0.5, -1: 0.5})
    assert newton_solve(U0, P) is not None
    np.testing.assert_array_equal(newton_solve(U0, P).coeffs, U0.coeffs)
    with pytest.raises(SingularJacobian):
        newton_solve(U0 + LatticeField1D.from_dict(1, 9, {3: 0.1}), P)


def test_gauge_covariance():
    br = periodic_branch(1, 0.5, 1, 0.05, "+", POT)
    P = LatticeProblem1D.at_resonance(POT, 1, 0.5, 0.05)
    for alpha in (0.3, 1.7, np.pi):
        assert residual(br.field * np.exp(1j * alpha), P).norm() <= 1e-12


def test_solve_g_vanishes_at_zero_eps_and_zero_amplitudes():
    P0 = LatticeProblem1D.at_resonance(POT2, 1, 0.3, 0.0)
    assert solve_g(0.4 - 0.2j, 0.1j, P0, 1).norm() == 0
    P = LatticeProblem1D.at_resonance(POT2, 1, 0.3, 0.02)
    assert solve_g(0.0, 0.0, P, 1).norm() == 0


def test_solve_g_leading_term():
    P = LatticeProblem1D.at_resonance(POT, 1, 0.0, 0.01)
    g = solve_g(1.0, 0.0, P, 1)
    assert g[1] == 0 and g[-1] == 0
    assert abs(g[3] - 0.0025) <= 1e-4


def test_solve_g_leading_term_is_first_order_in_eps():
    errs = []
    for eps in (0.02, 0.01, 0.005):
        P = LatticeProblem1D.at_resonance(POT, 1, 0.0, eps)
        errs.append(abs(solve_g(1.0, 0.0, P, 1)[3] - eps * 4 * 0.5 / 8))
    # remainder is O(eps^2)
    assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


def test_g_map_reflection_and_conjugation_symmetries():
    P = LatticeProblem1D.at_resonance(POT2, 1, 0.4, 0.05)
    a, b = 0.3 + 0.2j, -0.1 + 0.4j
    g = solve_g(a, b, P, 1)
    g_ref = solve_g(b, a, P, 1)
    g_conj = solve_g(np.conj(b), np.conj(a), P, 1)
    for m in P.indices:
        assert abs(g[m] - g_ref[-m]) <= 1e-12
        assert abs(g[m] - np.conj(g_conj[-m])) <= 1e-12


def test_g_map_conjugate_swap_for_real_amplitudes():
    P = LatticeProblem1D.at_resonance(POT2, 1, 0.4, 0.05)
    g, g_swap = solve_g(0.3, -0.2, P, 1), solve_g(-0.2, 0.3, P, 1)
    for m in P.indices:
        assert abs(g[m] - np.conj(g_swap[-m])) <= 1e-12


def test_bifurcation_residual_examples():
    P = LatticeProblem1D.at_resonance(POT, 1, 0.5, 0.05)
    assert bifurcation_residual(0, 0, P, 1) == (0, 0)
    P0 = LatticeProblem1D.at_resonance(POT, 1, 0.5, 0.0)
    c = 1 / np.sqrt(3)
    ra, rb = bifurcation_residual(c, c, P0, 1)
    assert abs(ra) < 1e-15 and abs(rb) < 1e-15


@settings(max_examples=25, deadline=None)
@given(st.complex_numbers(max_magnitude=1, allow_nan=False), st.complex_numbers(max_magnitude=1, allow_nan=False))
def test_bifurcation_residual_at_zero_eps_is_coupled_mode_algebra(a, b):
    P0 = LatticeProblem1D.at_resonance(POT2, 2, -0.3, 0.0, sigma=-1)
    w = 0.3
    ra, rb = bifurcation_residual(a, b, P0, 2)
    la = -0.3 * a + w * b + (abs(a) ** 2 + 2 * abs(b) ** 2) * a
    lb = -0.3 * b + w * a + (2 * abs(a) ** 2 + abs(b) ** 2) * b
    assert abs(ra - la) < 1e-13 and abs(rb - lb) < 1e-13


def test_bifurcation_residual_reflection_symmetry():
    P = LatticeProblem1D.at_resonance(POT2, 1, 0.4, 0.05)
    a, b = 0.3 + 0.2j, -0.1 + 0.4j
    A, B = bifurcation_residual(a, b, P, 1)
    A_ref, B_ref = bifurcation_residual(b, a, P, 1)
    A_cj, B_cj = bifurcation_residual(np.conj(b), np.conj(a), P, 1)
    assert abs(A - B_ref) <= 1e-12 and abs(B - A_ref) <= 1e-12
    assert abs(A - np.conj(B_cj)) <= 1e-12


def test_remainder_is_bounded_by_amplitude():
    ratios = []
    for eps in (0.04, 0.02, 0.01):
        P = LatticeProblem1D.at_resonance(POT2, 1, 0.2, eps)
        for a, b in [(0.2, 0.1j), (0.1 - 0.1j, 0.3)]:
            A, B = bifurcation_remainder(a, b, P, 1)
            ratios.append((abs(A) + abs(B)) / (abs(a) + abs(b)))
    assert max(ratios) < 1.0
    with pytest.raises(ValueError):
        bifurcation_remainder(0.1, 0.1, LatticeProblem1D.at_resonance(POT2, 1, 0.2, 0.0), 1)


def test_gap_edges():
    assert gap_edges(1, 0.1, POT) == pytest.approx((0.20, 0.30))
    assert gap_edges(1, 0.0, POT) == (0.25, 0.25)
    assert gap_edges(2, 0.1, POT) == (1.0, 1.0)
    lo1, hi1 = gap_edges(1, 0.1, POT)
    lo2, hi2 = gap_edges(1, 0.05, POT)
    assert hi2 - lo2 == pytest.approx((hi1 - lo1) / 2)


def test_periodic_branch_seed_and_amplitude():
    br = periodic_branch(1, 0.5, 1, 0.05, "+", POT)
    assert br.c == pytest.approx(1 / np.sqrt(3))
    assert abs(br.amplitude / np.sqrt(0.05) - br.c) <= 0.5 * 0.05
    assert br.field.is_real_symmetric(1e-12)
    xs = np.linspace(0, 4 * np.pi, 257)
    assert np.max(np.abs(synthesize(br.field, 0.05, xs).imag)) <= 1e-10


def test_periodic_branch_minus_branch_is_real_odd():
    br = periodic_branch(2, 1.0, 1, 0.05, "-", PotentialSpec({2: 0.5}))
    assert br.c == pytest.approx(np.sqrt(0.5 / 3))
    assert br.field.is_real_symmetric(1e-12)
    assert all(abs(br.field[m] + br.field[-m]) <= 1e-12 for m in br.field.indices)


def test_periodic_branch_not_present():
    with pytest.raises(BranchNotPresent):
        periodic_branch(1, -0.5, 1, 0.05, "+", POT)
    with pytest.raises(BranchNotPresent):
        periodic_branch(1, 0.2, 1, 0.05, "-", POT)


def test_off_resonance_rule():
    assert LatticeProblem1D(POT, 0.6, 0.02, 1, 0, 16).is_off_resonance()
    assert not LatticeProblem1D(POT, 0.3, 0.05, 1, 0, 16).is_off_resonance()
