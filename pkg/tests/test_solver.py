import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nldg.assembly import SymBandMatrix, load_vector, stiffness
from nldg.kernel import Kernel
from nldg.mesh import elements_for_ratio, perturbed_mesh, uniform_mesh
from nldg.problems import example1, example3
from nldg.solver import (
    NotPositiveDefinite, SolverError, cg_solve, cholesky_solve, condition_report, solve,
    spectral_condition_number,
)

DELTA = 0.4


@pytest.mark.parametrize("solver", [cg_solve, cholesky_solve])
def test_identity(solver):
    d = np.array([1.0, -2.0, 3.0])
    np.testing.assert_allclose(solver(np.eye(3), d).coefficients, d, atol=1e-15)


@pytest.mark.parametrize("solver", [cg_solve, cholesky_solve])
def test_two_by_two(solver):
    A = np.array([[4.0, 1.0], [1.0, 3.0]])
    rep = solver(A, np.array([1.0, 2.0]))
    np.testing.assert_allclose(rep.coefficients, [1 / 11, 7 / 11], atol=1e-14)


def test_cg_converges_in_two_steps_for_two_by_two():
    assert cg_solve(np.array([[4.0, 1.0], [1.0, 3.0]]), np.array([1.0, 2.0])).iterations <= 2


def test_cholesky_rejects_indefinite():
    with pytest.raises(NotPositiveDefinite):
        cholesky_solve(np.array([[1.0, 2.0], [2.0, 1.0]]), np.ones(2))


def test_cg_reports_non_convergence():
    A = stiffness(uniform_mesh(40, DELTA), Kernel.constant(DELTA))
    with pytest.raises(SolverError, match="did not reach"):
        cg_solve(A, np.ones(A.dimension), tol=1e-14, maxit=2)


def test_zero_rhs():
    rep = cg_solve(np.eye(4), np.zeros(4))
    assert rep.iterations == 0
    assert not rep.coefficients.any()


def test_unknown_method():
    with pytest.raises(ValueError):
        solve(np.eye(2), np.ones(2), method="lu")


def test_cg_iterations_bounded_at_fine_resolution():
    mesh = uniform_mesh(elements_for_ratio(64, DELTA), DELTA)
    A = stiffness(mesh, Kernel.constant(DELTA))
    d = load_vector(mesh, example1(DELTA).forcing)
    rep = cg_solve(A, d, tol=1e-12)
    # bounded condition number means a resolution-independent iteration count
    assert rep.iterations <= 30
    assert rep.final_residual <= 1e-12


@pytest.mark.parametrize("spec", [example1(DELTA), example3(DELTA)], ids=["constant", "hat"])
@pytest.mark.parametrize("seed", [None, 0, 1])
def test_cg_agrees_with_cholesky(spec, seed):
    M = elements_for_ratio(16, DELTA)
    mesh = uniform_mesh(M, DELTA) if seed is None else perturbed_mesh(M, DELTA, seed)
    A = stiffness(mesh, spec.kernel)
    d = load_vector(mesh, spec.forcing)
    u_cg = cg_solve(A, d, tol=1e-14).coefficients
    u_ch = cholesky_solve(A, d).coefficients
    assert np.max(np.abs(u_cg - u_ch)) <= 1e-10 * np.max(np.abs(u_ch))


def test_condition_of_diagonal():
    assert spectral_condition_number(np.diag([4.0, 1.0])) == pytest.approx(4.0)
    rep = condition_report(SymBandMatrix.from_dense(np.diag([4.0, 1.0, 2.0])))
    assert (rep.lambda_min, rep.lambda_max) == pytest.approx((1.0, 4.0))


def test_condition_rejects_indefinite():
    with pytest.raises(NotPositiveDefinite):
        spectral_condition_number(np.diag([1.0, -1.0]))


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_condition_number_is_permutation_invariant(seed):
    A = stiffness(uniform_mesh(10, DELTA), Kernel.hat(DELTA)).to_dense()
    p = np.random.default_rng(seed).permutation(A.shape[0])
    assert spectral_condition_number(A[np.ix_(p, p)]) == pytest.approx(spectral_condition_number(A), rel=1e-12)
