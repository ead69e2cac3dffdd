"""Acceptance gate: one test per criterion, each recording a PASS/FAIL line.

The lines are printed in the terminal summary of the pytest run.
"""

import time

import numpy as np
import pytest

from cmelab.coupled_mode import (
    CoupledModeParams,
    SolitonProfile,
    cme_residual,
    dirac_linearization,
    dispersion_amplitude,
    kernel_check,
    soliton_exact,
)
from cmelab.fourier_core import LatticeField1D, PotentialSpec, banach_constant, convolve, synthesize
from cmelab.lattice_1d import (
    LatticeProblem1D,
    bifurcation_residual,
    jacobian,
    newton_solve,
    periodic_branch,
    residual,
)
from cmelab.lattice_2d import (
    CM4_ORDER,
    LatticeField2D,
    LatticeProblem2D,
    PotentialSpec2D,
    bifurcation_residual_2d,
    cm4_residual,
    convolve_2d,
    jacobian_2d,
    residual_2d,
    resonant_set,
    resonant_set_violations,
)
from cmelab.soliton_solver import SolverConfig, error_vs_cm, partition_diagnostic, soliton_sweep
from conftest import ACCEPTANCE_LINES
from oracles import brute_resonant_set, fd_jacobian, log_slope

SOLITON_EPS = (0.16, 0.08, 0.04)


def record(label, passed, detail):
    ACCEPTANCE_LINES.append((label, bool(passed), detail))
    print(f"{label}: {'PASS' if passed else 'FAIL'} ({detail})")
    assert passed, detail


@pytest.fixture(scope="module")
def soliton_runs():
    base = CoupledModeParams(1, 1.0, 0.0, 1)
    start = time.perf_counter()
    sweep = soliton_sweep(SOLITON_EPS, base, SolverConfig(K=64, N=8192), PotentialSpec({1: 1.0}))
    elapsed = time.perf_counter() - start
    out = {}
    for e in SOLITON_EPS:
        p = CoupledModeParams(1, 1.0, 0.0, 1, e)
        out[e] = (sweep[e], error_vs_cm(sweep[e].field, SolitonProfile(p)), partition_diagnostic(sweep[e].field, p))
    return out, elapsed


def test_criterion_01_dispersion_relation():
    pot = PotentialSpec({1: 0.5})
    eps = 0.05
    worst, slowest = 0.0, 0.0
    cases = [(0.2, "+"), (0.5, "+"), (1.0, "+"), (1.0, "-")]
    for Omega, branch in cases:
        t = time.perf_counter()
        br = periodic_branch(1, Omega, 1, eps, branch, pot)
        slowest = max(slowest, time.perf_counter() - t)
        assert br.c == pytest.approx(dispersion_amplitude(Omega, 0.5, 1, branch))
        worst = max(worst, abs(br.amplitude / np.sqrt(eps) - br.c))
    ok = worst <= 0.5 * eps and slowest < 1.0
    record("criterion 1 (dispersion relation)", ok, f"max |amp/sqrt(eps) - c| = {worst:.2e} <= {0.5 * eps}; slowest {slowest:.2f} s")


def test_criterion_02_periodic_error_scaling():
    pot = PotentialSpec({1: 0.5})
    eps = [0.2, 0.1, 0.05, 0.025]
    start = time.perf_counter()
    slopes = {}
    for Omega, branch in [(0.5, "+"), (1.0, "-")]:
        devs = [periodic_branch(1, Omega, 1, e, branch, pot).deviation for e in eps]
        slopes[branch] = log_slope(eps, devs)
    elapsed = time.perf_counter() - start
    ok = min(slopes.values()) >= 1.4 and elapsed < 10
    record("criterion 2 (periodic error slope)", ok,
           f"slopes {', '.join(f'{k}: {v:.3f}' for k, v in slopes.items())} >= 1.4; {elapsed:.1f} s")


def test_criterion_03_soliton_error_scaling(soliton_runs):
    runs, elapsed = soliton_runs
    errs = [runs[e][1] for e in SOLITON_EPS]
    slope = log_slope(SOLITON_EPS, errs)
    C = errs[0] / SOLITON_EPS[0] ** (5 / 6)
    bound_ok = all(err <= C * e ** (5 / 6) * (1 + 1e-12) for e, err in zip(SOLITON_EPS, errs))
    ok = slope >= 0.83 and bound_ok and elapsed < 120
    detail = (f"errors {', '.join(f'{v:.4f}' for v in errs)}; slope {slope:.3f} >= 0.83; "
              f"C = {C:.3f} from eps={SOLITON_EPS[0]}, bound holds at all points: {bound_ok}; {elapsed:.0f} s")
    record("criterion 3 (soliton error slope and constant)", ok, detail)


def test_criterion_04_exact_soliton_residual():
    params = CoupledModeParams(1, 1.0, 0.0, 1)
    res = cme_residual(params, np.linspace(-20, 20, 4001))
    ys = np.linspace(10, 20, 101) / params.kappa
    rate = -np.polyfit(ys, np.log(np.abs(soliton_exact(params, ys)[0])), 1)[0]
    rel = abs(rate - params.kappa) / params.kappa
    ok = res <= 1e-6 and rel <= 0.01
    record("criterion 4 (exact soliton residual)", ok, f"residual {res:.1e} <= 1e-6; decay-rate error {rel:.1e} <= 1%")


def _kernel_residuals(Y, h):
    params = CoupledModeParams(1, 1.0, 0.0, 1)
    prof = SolitonProfile(params)
    ys = np.linspace(-Y, Y, int(round(2 * Y / h)) + 1)
    return np.array(kernel_check(dirac_linearization(prof, params, ys), prof, ys))


def test_criterion_05_dirac_kernel():
    coarse = _kernel_residuals(20, 0.01)
    # the refinement ratio is taken on a domain long enough that the zero boundary does not pollute it
    ratio = _kernel_residuals(40, 0.01) / _kernel_residuals(40, 0.005)
    ratio20 = coarse / _kernel_residuals(20, 0.005)
    ok = np.all(coarse <= 1e-5) and np.all(ratio >= 2**4)
    detail = (f"h=0.01 residuals {coarse[0]:.1e}, {coarse[1]:.1e} <= 1e-5; h/2 ratios {ratio[0]:.3f}, {ratio[1]:.3f} "
              f"(Y=40), {ratio20[0]:.2f}, {ratio20[1]:.2f} (Y=20); need >= 16")
    record("criterion 5 (Dirac kernel)", ok, detail)


def test_criterion_06_partition(soliton_runs):
    runs, _ = soliton_runs
    ratios = [runs[e][2].ratio for e in SOLITON_EPS]
    scaled = [r / e ** (1 / 3) for r, e in zip(ratios, SOLITON_EPS)]
    bounded = all(s <= scaled[0] * (1 + 1e-12) for s in scaled)
    monotone = all(a > b for a, b in zip(ratios, ratios[1:]))
    ok = bounded and monotone
    detail = (f"ratios {', '.join(f'{v:.3f}' for v in ratios)}; ratio/eps^(1/3) {', '.join(f'{v:.3f}' for v in scaled)}; "
              f"bounded by the eps={SOLITON_EPS[0]} value: {bounded}; decreasing with eps: {monotone}")
    record("criterion 6 (partition diagnostic)", ok, detail)


def test_criterion_07_off_resonance_uniqueness():
    rng = np.random.default_rng(2024)
    pot = PotentialSpec({1: 0.5, 2: 0.2})
    worst = 0.0
    for trial in range(50):
        P = LatticeProblem1D(pot, 0.6, 0.02, 1 if trial % 2 else -1, trial % 2, 16)
        assert P.is_off_resonance()
        U0 = P.zeros().with_coeffs(rng.normal(size=len(P.zeros())) + 1j * rng.normal(size=len(P.zeros())))
        U0 = U0 * (rng.uniform(0.01, 0.1) / U0.norm())
        worst = max(worst, newton_solve(U0, P).norm())
    record("criterion 7 (off-resonance uniqueness)", worst <= 1e-10, f"50 starts, max final norm {worst:.1e} <= 1e-10")


def test_criterion_08_resonant_sets():
    s11 = resonant_set((1, 1)).members
    s50 = resonant_set((5, 0))
    ok11 = s11 == ((1, 1), (-1, -1), (1, -1), (-1, 1))
    ok50 = set(s50.members) == brute_resonant_set((5, 0), 10) and s50.dim == 6
    violations = [(n1, n2) for n1 in range(7) for n2 in range(7) if resonant_set_violations(resonant_set((n1, n2)))]
    ok = ok11 and ok50 and not violations
    record("criterion 8 (resonant sets)", ok, f"S_(1,1) exact: {ok11}; S_(5,0) = brute force (6): {ok50}; structure violations: {violations}")


def test_criterion_09_oracle_equivalences():
    rng = np.random.default_rng(9)
    # 1D and 2D Jacobians against central differences
    pot = PotentialSpec({1: 0.5, 2: 0.3})
    P = LatticeProblem1D(pot, 0.3, 0.1, 1, 1, 11)
    U = P.zeros().with_coeffs(0.3 * (rng.normal(size=len(P.zeros())) + 1j * rng.normal(size=len(P.zeros()))))

    def F1(x):
        d = x.size // 2
        r = residual(U.with_coeffs(x[:d] + 1j * x[d:]), P).coeffs
        return np.concatenate([r.real, r.imag])

    x1 = np.concatenate([U.coeffs.real, U.coeffs.imag])
    jac1 = np.max(np.abs(jacobian(U, P) - fd_jacobian(F1, x1)))

    w4 = dict(w22=0.3, w02=-0.2, w20=0.5, w2m2=0.1)
    P2 = LatticeProblem2D(PotentialSpec2D.from_cm4(**w4), (1, 1), 0.4, 0.05, 1, 9)
    V = P2.zeros().with_coeffs(0.1 * (rng.normal(size=(10, 10)) + 1j * rng.normal(size=(10, 10))))

    def F2(x):
        d = x.size // 2
        r = residual_2d(V.with_coeffs((x[:d] + 1j * x[d:]).reshape(10, 10)), P2.omega2, P2.eps, 1, P2.potential)
        return np.concatenate([r.coeffs.ravel().real, r.coeffs.ravel().imag])

    x2 = np.concatenate([V.coeffs.ravel().real, V.coeffs.ravel().imag])
    jac2 = np.max(np.abs(jacobian_2d(V, P2) - fd_jacobian(F2, x2)))

    P0 = LatticeProblem2D(PotentialSpec2D.from_cm4(**w4), (1, 1), 0.4, 0.0, 1, 9)
    cm4 = 0.0
    for _ in range(100):
        a = rng.normal(size=4) + 1j * rng.normal(size=4)
        cm4 = max(cm4, np.max(np.abs(bifurcation_residual_2d(a, P0) - cm4_residual(a, 0.4, 1, **w4))))

    banach_ok = True
    for s in (0.6, 1.0):
        M = 16
        C = banach_constant(s, M)
        for _ in range(100):
            A = LatticeField1D(0, 2 * M, np.where(np.abs(np.arange(-2 * M, 2 * M + 1, 2)) <= M,
                                                rng.normal(size=2 * M + 1) + 1j * rng.normal(size=2 * M + 1), 0))
            B = LatticeField1D(0, 2 * M, np.where(np.abs(np.arange(-2 * M, 2 * M + 1, 2)) <= M // 2,
                                                rng.normal(size=2 * M + 1), 0))
            banach_ok &= convolve(A, B).norm(s) <= C * A.norm(s) * B.norm(s) * (1 + 1e-12)
    for s in (1.1, 2.0):
        M = 8
        C = banach_constant(s, M, dim=2)
        for _ in range(100):
            f = LatticeField2D((0, 0), 2 * M)
            m1, m2 = np.meshgrid(f.axis(0), f.axis(1), indexing="ij")
            box = np.maximum(np.abs(m1), np.abs(m2))
            A = f.with_coeffs(np.where(box <= M, rng.normal(size=box.shape) + 1j * rng.normal(size=box.shape), 0))
            B = f.with_coeffs(np.where(box <= M // 2, rng.normal(size=box.shape), 0))
            banach_ok &= convolve_2d(A, B).norm(s) <= C * A.norm(s) * B.norm(s) * (1 + 1e-12)

    ok = jac1 <= 1e-6 and jac2 <= 1e-6 and cm4 <= 1e-12 and banach_ok
    record("criterion 9 (oracle equivalences)", ok,
           f"Jacobian vs FD {jac1:.1e} (1D), {jac2:.1e} (2D) <= 1e-6; cm4 vs projection {cm4:.1e} <= 1e-12; "
           f"Banach inequality in 1D and 2D over 100 trials each: {bool(banach_ok)}")


def test_criterion_10_symmetries(soliton_runs):
    rng = np.random.default_rng(10)
    pot = PotentialSpec({1: 0.5, 2: 0.3})
    P = LatticeProblem1D.at_resonance(pot, 1, 0.4, 0.05)
    literal, reflected = 0.0, 0.0
    for _ in range(10):
        a, b = 0.3 * (rng.normal(size=2) + 1j * rng.normal(size=2))
        A, B = bifurcation_residual(a, b, P, 1)
        A_sw, B_sw = bifurcation_residual(b, a, P, 1)
        literal = max(literal, abs(A - np.conj(B_sw)))
        reflected = max(reflected, abs(A - B_sw))
    sym_ok = literal <= 1e-10

    br = periodic_branch(1, 0.5, 1, 0.05, "+", PotentialSpec({1: 0.5}))
    assert abs(br.a - np.conj(br.b)) == 0
    imag = np.max(np.abs(synthesize(br.field, 0.05, np.linspace(0, 4 * np.pi, 1024)).imag))
    runs, _ = soliton_runs
    rev = max(np.max(np.abs(r[0].field.u - r[0].field.reflect())) for r in runs.values())
    ok = sym_ok and imag <= 1e-10 and rev <= 1e-10
    record("criterion 10 (symmetry suite)", ok,
           f"A(a,b) - conj(B(b,a)) up to {literal:.1e} on complex (a,b) (A(a,b) - B(b,a): {reflected:.1e}); "
           f"Im U under b = conj(a): {imag:.1e} <= 1e-10; soliton reversibility {rev:.1e} <= 1e-10")
