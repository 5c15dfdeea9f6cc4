"""Linear solvers and spectral condition numbers for the SPD stiffness matrix."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .assembly import SymBandMatrix


class SolverError(RuntimeError):
    pass


class NotPositiveDefinite(SolverError):
    pass


@dataclass
class SolveReport:
    coefficients: np.ndarray
    iterations: int
    final_residual: float
    method: str = "cg"


@dataclass
class ConditionReport:
    cond: float
    lambda_min: float
    lambda_max: float
    meta: dict = field(default_factory=dict)

    def __float__(self):
        return self.cond


def _as_band(A) -> SymBandMatrix:
    if isinstance(A, SymBandMatrix):
        return A
    return SymBandMatrix.from_dense(np.asarray(A, dtype=float))


def _relative_residual(A: SymBandMatrix, u, d) -> float:
    nd = np.linalg.norm(d)
    r = np.linalg.norm(A.matvec(u) - d)
    return float(r / nd) if nd > 0 else float(r)


def cg_solve(A, d, tol: float = 1e-12, maxit: int | None = None, x0=None) -> SolveReport:
    """Unpreconditioned conjugate gradients, stopping on ``||r||_2 / ||d||_2 <= tol``."""
    A = _as_band(A)
    d = np.asarray(d, dtype=float)
    n = A.dimension
    if d.shape != (n,):
        raise ValueError(f"right-hand side has shape {d.shape}, expected ({n},)")
    if maxit is None:
        maxit = 10 * n
    nd = np.linalg.norm(d)
    if nd == 0.0:
        return SolveReport(np.zeros(n), 0, 0.0, "cg")

    u = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    r = d - A.matvec(u)
    p = r.copy()
    rr = r @ r
    it = 0
    while np.sqrt(rr) / nd > tol:
        if it >= maxit:
            raise SolverError(
                f"CG did not reach relative residual {tol:g} in {maxit} iterations "
                f"(got {np.sqrt(rr) / nd:.3e}); matrix may be ill-conditioned or mis-assembled"
            )
        Ap = A.matvec(p)
        pAp = p @ Ap
        if pAp <= 0:
            raise NotPositiveDefinite("CG met a direction of non-positive curvature")
        alpha = rr / pAp
        u += alpha * p
        r -= alpha * Ap
        rr_new = r @ r
        p = r + (rr_new / rr) * p
        rr = rr_new
        it += 1
    return SolveReport(u, it, _relative_residual(A, u, d), "cg")


def cholesky_solve(A, d) -> SolveReport:
    A = _as_band(A)
    d = np.asarray(d, dtype=float)
    try:
        factor = scipy.linalg.cholesky_banded(A.band, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"banded Cholesky hit a non-positive pivot: {exc}") from None
    u = scipy.linalg.cho_solve_banded((factor, True), d)
    return SolveReport(u, 0, _relative_residual(A, u, d), "cholesky")


def solve(A, d, method: str = "cg", tol: float = 1e-12, maxit: int | None = None) -> SolveReport:
    if method == "cg":
        return cg_solve(A, d, tol=tol, maxit=maxit)
    if method == "cholesky":
        return cholesky_solve(A, d)
    raise ValueError(f"unknown solver {method!r}; expected 'cg' or 'cholesky'")


def condition_report(A) -> ConditionReport:
    dense = _as_band(A).to_dense() if not isinstance(A, np.ndarray) else np.asarray(A, dtype=float)
    ev = np.linalg.eigvalsh(dense)
    lo, hi = float(ev[0]), float(ev[-1])
    if lo <= 0:
        raise NotPositiveDefinite(f"smallest eigenvalue {lo:.3e} is not positive")
    return ConditionReport(hi / lo, lo, hi, {"method": "numpy.linalg.eigvalsh", "dimension": dense.shape[0]})


def spectral_condition_number(A) -> float:
    """``lambda_max / lambda_min`` from a dense symmetric eigendecomposition."""
    return condition_report(A).cond
