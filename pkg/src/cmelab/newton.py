"""Dense Newton iteration on real coordinates, shared by all solvers."""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NoConvergence, SingularJacobian


@dataclass
class NewtonResult:
    x: np.ndarray
    iterations: int
    residual: float


def _l2(r):
    return float(np.linalg.norm(r))


def newton(F, J, x0, tol=1e-12, max_iter=50, norm=_l2, cond_max=None, basis=None, damped=False):
    """Solve ``F(x) = 0`` by Newton's method.

    ``basis`` (orthonormal columns) restricts the iteration to an invariant
    subspace: iterates are projected onto it and the Jacobian is reduced to
    ``B^T J B``.  With ``cond_max`` the 2-norm condition number of the
    (reduced) Jacobian is checked every step; otherwise LAPACK's reciprocal
    condition estimate must stay above machine precision.  ``damped``
    halves the step until the residual norm decreases (at most 20 times).
    """
    x = np.array(x0, dtype=float)
    if basis is not None:
        x = basis @ (basis.T @ x)
    r = F(x)
    res = norm(r)
    for it in range(max_iter + 1):
        if not np.isfinite(res):
            raise NoConvergence("residual is not finite", it, res)
        if res <= tol:
            return NewtonResult(x, it, res)
        if it == max_iter:
            break
        jac = J(x)
        rhs = r
        if basis is not None:
            jac = basis.T @ jac @ basis
            rhs = basis.T @ r
        if cond_max is not None:
            cond = np.linalg.cond(jac)
            if not np.isfinite(cond) or cond > cond_max:
                raise SingularJacobian(f"Jacobian condition number {cond:.3e} exceeds {cond_max:.1e}")
        with warnings.catch_warnings():
            warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
            try:
                step = scipy.linalg.solve(jac, -rhs)
            except (np.linalg.LinAlgError, scipy.linalg.LinAlgWarning) as exc:
                raise SingularJacobian(str(exc)) from None
        if basis is not None:
            step = basis @ step
        t = 1.0
        x_new = x + step
        r_new = F(x_new)
        res_new = norm(r_new)
        if damped:
            while not (res_new < res) and t > 2.0**-20:
                t *= 0.5
                x_new = x + t * step
                r_new = F(x_new)
                res_new = norm(r_new)
        x, r, res = x_new, r_new, res_new
    raise NoConvergence(f"no convergence in {max_iter} iterations (residual {res:.3e})", max_iter, res)
