"""Benchmark problems, manufactured forcings, homogenization and reference solutions."""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

from . import assembly, solver
from .expr import compile_expression
from .functions import PiecewiseFn, PiecewiseLinear, gauss_legendre
from .kernel import Kernel, KernelVariant, moment
from .mesh import Mesh1D, elements_for_ratio, uniform_mesh

MAX_POLY_DEGREE = 4
REFERENCE_RATIO = 1024


class ProblemError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """Homogeneous problem ``-L u = forcing`` on (0, 1) with ``u = 0`` on the collar."""

    name: str
    kernel: Kernel
    forcing: PiecewiseFn
    exact_solution: PiecewiseFn | None = None

    @property
    def delta(self) -> float:
        return self.kernel.delta

    @property
    def key(self):
        return (self.name, self.kernel.variant.value, self.kernel.delta)


def _check_delta(delta: float) -> None:
    if not 0 < delta < 0.5:
        raise ProblemError(f"delta must lie in (0, 1/2), got {delta}")


def _poly(u) -> np.polynomial.Polynomial:
    p = u if isinstance(u, np.polynomial.Polynomial) else np.polynomial.Polynomial(u)
    p = p.trim()
    if p.degree() > MAX_POLY_DEGREE:
        raise ProblemError(f"manufactured solutions are limited to degree {MAX_POLY_DEGREE}, got {p.degree()}")
    return p


def example1_forcing(kernel: Kernel, delta: float | None = None) -> ProblemSpec:
    """Constant kernel, exact solution ``u = x**2`` extended by zero."""
    delta = kernel.delta if delta is None else delta
    _check_delta(delta)
    if kernel.variant is not KernelVariant.CONSTANT:
        raise ProblemError("example 1's closed-form forcing needs the constant kernel; use forcing_from_exact")
    if kernel.delta != delta:
        raise ProblemError("kernel horizon does not match delta")

    def b(x):
        lo = np.maximum(0.0, x - delta)
        hi = np.minimum(1.0, x + delta)
        return x * x - (hi**3 - lo**3) / (6.0 * delta)

    exact = PiecewiseFn(lambda x: x * x, (), lambda x: 2.0 * x, "C-infinity", "x^2")
    forcing = PiecewiseFn(b, (delta, 1.0 - delta), None, "C0, kinks at delta and 1-delta", "b_delta")
    return ProblemSpec("example1", kernel, forcing, exact)


def forcing_from_exact(u, kernel: Kernel, name: str | None = None) -> ProblemSpec:
    """Manufacture ``b = u - int u(y) gamma(y - x) dy`` for a polynomial ``u`` (zero on the collar).

    ``u`` is a ``numpy.polynomial.Polynomial`` or its ascending coefficients.
    The convolution uses the Taylor expansion of ``u`` about ``x`` against
    exact kernel moments over the clipped window ``[max(0, x - delta), min(1, x + delta)]``.
    """
    p = _poly(u)
    delta = kernel.delta
    _check_delta(delta)
    derivs = [p]
    for _ in range(p.degree()):
        derivs.append(derivs[-1].deriv())

    def b(x):
        x = np.asarray(x, dtype=float)
        lo = np.maximum(-x, -delta)
        hi = np.minimum(1.0 - x, delta)
        conv = np.zeros_like(x)
        for k, dk in enumerate(derivs):
            conv += dk(x) / math.factorial(k) * moment(kernel, k, lo, hi)
        return p(x) - conv

    dp = p.deriv()
    exact = PiecewiseFn(p, (), dp, "polynomial", name or f"poly{list(p.coef)}")
    forcing = PiecewiseFn(b, (delta, 1.0 - delta), None, "C0, kinks at delta and 1-delta", "b")
    return ProblemSpec(name or f"manufactured:{list(p.coef)}", kernel, forcing, exact)


def example1(delta: float = 0.4) -> ProblemSpec:
    return example1_forcing(Kernel.constant(delta), delta)


def example2(delta: float = 0.4) -> ProblemSpec:
    """Constant kernel with ``b = exp(x)``; the solution's slope jumps at delta and 1-delta."""
    _check_delta(delta)
    forcing = PiecewiseFn(np.exp, (delta, 1.0 - delta), np.exp, "C-infinity in (0, 1)", "exp(x)")
    return ProblemSpec("example2", Kernel.constant(delta), forcing)


def example3(delta: float = 0.4) -> ProblemSpec:
    """Hat kernel with ``b = 0.01 exp(6x)``; the solution is C1 with curvature jumps at delta and 1-delta."""
    _check_delta(delta)
    forcing = PiecewiseFn(lambda x: 0.01 * np.exp(6.0 * x), (delta, 1.0 - delta),
                          lambda x: 0.06 * np.exp(6.0 * x), "C-infinity in (0, 1)", "0.01 exp(6x)")
    return ProblemSpec("example3", Kernel.hat(delta), forcing)


def custom(expression: str, kernel: Kernel) -> ProblemSpec:
    _check_delta(kernel.delta)
    f = compile_expression(expression)
    d = kernel.delta
    forcing = PiecewiseFn(f, (d, 1.0 - d), None, "user expression", expression)
    return ProblemSpec(f"custom:{expression}", kernel, forcing)


def get_problem(name: str, delta: float = 0.4, kernel: Kernel | None = None,
                expression: str | None = None) -> ProblemSpec:
    if name == "example1":
        if kernel is not None and kernel.variant is KernelVariant.HAT:
            return forcing_from_exact([0.0, 0.0, 1.0], kernel, "example1-hat")
        return example1(delta)
    if name == "example2":
        return example2(delta)
    if name == "example3":
        return example3(delta)
    if name == "custom":
        if not expression:
            raise ProblemError("problem 'custom' needs a forcing expression")
        return custom(expression, kernel or Kernel.constant(delta))
    raise ProblemError(f"unknown problem {name!r}")


def homogenize(b, g, kernel: Kernel, order: int = 8) -> PiecewiseFn:
    """Forcing of the equivalent problem with zero collar data.

    With ``bbar = b`` on (0, 1) and ``g`` on the collar, returns
    ``f(x) = int bbar(y) gamma(y - x) dy`` over the kernel window.  Solve
    with ``f`` for ``ubar`` and recover ``u = ubar + bbar`` (see :func:`recover`).
    """
    d = kernel.delta
    t, w = gauss_legendre(order)
    b_bps = np.asarray(getattr(b, "breakpoints", ()), dtype=float)
    g_bps = np.asarray(getattr(g, "breakpoints", ()), dtype=float)
    jumps = np.concatenate([[0.0, 1.0], b_bps, g_bps])

    def f(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty_like(x)
        for n, xi in enumerate(x.ravel()):
            cuts = np.concatenate([[xi - d, xi, xi + d], jumps])
            cuts = np.unique(cuts[(cuts >= xi - d) & (cuts <= xi + d)])
            a = cuts[:-1, None]
            length = np.diff(cuts)[:, None]
            y = (a + length * t).ravel()
            wy = (length * w).ravel()
            inside = (y >= 0.0) & (y <= 1.0)
            vals = np.empty_like(y)
            if inside.any():
                vals[inside] = b(y[inside])
            if (~inside).any():
                vals[~inside] = g(y[~inside])
            out.flat[n] = np.sum(vals * kernel(y - xi) * wy)
        return out

    out_bps = np.concatenate([jumps - d, jumps + d])
    out_bps = out_bps[(out_bps >= 0.0) & (out_bps <= 1.0)]
    return PiecewiseFn(lambda x: f(x).reshape(np.shape(x)), out_bps, None, "C0", "homogenized forcing")


def recover(u_bar: PiecewiseFn, b) -> PiecewiseFn:
    """``u = ubar + b`` on (0, 1)."""
    bps = np.concatenate([u_bar.breakpoints, np.asarray(getattr(b, "breakpoints", ()), dtype=float)])
    return PiecewiseFn(lambda x: u_bar(x) + b(x), bps[(bps >= 0) & (bps <= 1)], None, "", "u")


@dataclass
class Discretization:
    mesh: Mesh1D
    stiffness: assembly.SymBandMatrix
    load: np.ndarray
    report: solver.SolveReport
    solution: PiecewiseLinear


def solve_problem(spec: ProblemSpec, mesh: Mesh1D, method: str = "cg", tol: float = 1e-12,
                  maxit: int | None = None, k_order: int = assembly.K_QUAD_ORDER,
                  load_order: int = assembly.LOAD_QUAD_ORDER) -> Discretization:
    A = assembly.stiffness(mesh, spec.kernel, k_order)
    d = assembly.load_vector(mesh, spec.forcing, load_order)
    rep = solver.solve(A, d, method=method, tol=tol, maxit=maxit)
    return Discretization(mesh, A, d, rep, PiecewiseLinear(mesh.nodes, rep.coefficients))


_reference_cache: dict = {}
_reference_lock = threading.Lock()


def reference_solution(spec: ProblemSpec, delta_over_h_ref: int = REFERENCE_RATIO,
                       finest: int | None = None) -> PiecewiseLinear:
    """Fine uniform-mesh solution used as the truth when no exact solution exists.

    ``delta/h`` is an integer on the reference mesh, so delta and 1 - delta
    are always nodes.  Results are cached per problem and resolution.
    """
    if finest is not None and delta_over_h_ref < 4 * finest:
        raise ProblemError(
            f"reference resolution delta/h={delta_over_h_ref} must be at least 4x the finest study "
            f"resolution ({finest})"
        )
    key = (spec.key, delta_over_h_ref)
    with _reference_lock:
        hit = _reference_cache.get(key)
    if hit is not None:
        return hit
    mesh = uniform_mesh(elements_for_ratio(delta_over_h_ref, spec.delta), spec.delta)
    # Cholesky gives the reference a solver error at rounding level.
    sol = solve_problem(spec, mesh, method="cholesky").solution
    sol.name = f"reference(delta/h={delta_over_h_ref})"
    with _reference_lock:
        return _reference_cache.setdefault(key, sol)


def clear_reference_cache() -> None:
    with _reference_lock:
        _reference_cache.clear()
