"""Galerkin assembly for the hybrid continuous/discontinuous P1 space.

The trial/test space is continuous piecewise linear on [0, 1] and identically
zero on the collar, so it may jump at x = 0 and x = 1.  Because every kernel
integrates to one over its support and the collar has width delta, the
bilinear form splits as ``A = M - K`` with

    M_ij = int_0^1 phi_i phi_j dx
    K_ij = int_0^1 int_0^1 phi_i(x) phi_j(y) gamma(y - x) dy dx.

The inner integral of K is done in closed form from kernel moments.  The
outer one uses Gauss-Legendre on sub-intervals cut at every ``x_k - delta``,
``x_k`` and ``x_k + delta`` so the integrand is a polynomial on each piece.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .functions import quadrature_points, split_points
from .kernel import Kernel, moment
from .mesh import Mesh1D

K_QUAD_ORDER = 4
LOAD_QUAD_ORDER = 5


class AssemblyError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SymBandMatrix:
    """Symmetric banded matrix in LAPACK lower band layout.

    ``band[d, j] = A[j + d, j]`` for ``0 <= d <= half_bandwidth``; entries past
    the end of a column are zero padding.
    """

    band: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.band, dtype=float)
        if b.ndim != 2:
            raise ValueError("band storage must be two-dimensional")
        object.__setattr__(self, "band", b)

    @property
    def dimension(self) -> int:
        return self.band.shape[1]

    @property
    def half_bandwidth(self) -> int:
        return self.band.shape[0] - 1

    @property
    def shape(self):
        return (self.dimension, self.dimension)

    @classmethod
    def zeros(cls, n: int, half_bandwidth: int) -> "SymBandMatrix":
        return cls(np.zeros((min(half_bandwidth, n - 1) + 1, n)))

    @classmethod
    def from_dense(cls, a, half_bandwidth: int | None = None) -> "SymBandMatrix":
        a = np.asarray(a, dtype=float)
        n = a.shape[0]
        if a.shape != (n, n):
            raise ValueError("matrix must be square")
        if half_bandwidth is None:
            i, j = np.nonzero(np.tril(a))
            half_bandwidth = int((i - j).max()) if i.size else 0
        bw = min(half_bandwidth, n - 1)
        band = np.zeros((bw + 1, n))
        for d in range(bw + 1):
            band[d, : n - d] = np.diagonal(a, -d)
        return cls(band)

    @classmethod
    def identity(cls, n: int) -> "SymBandMatrix":
        return cls(np.ones((1, n)))

    def to_dense(self) -> np.ndarray:
        n = self.dimension
        a = np.zeros((n, n))
        for d in range(self.half_bandwidth + 1):
            idx = np.arange(n - d)
            a[idx + d, idx] = self.band[d, : n - d]
            a[idx, idx + d] = self.band[d, : n - d]
        return a

    def diagonal(self) -> np.ndarray:
        return self.band[0].copy()

    def __getitem__(self, ij):
        i, j = ij
        if i < j:
            i, j = j, i
        d = i - j
        return float(self.band[d, j]) if d <= self.half_bandwidth else 0.0

    def matvec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        n = self.dimension
        y = self.band[0] * x
        for d in range(1, self.half_bandwidth + 1):
            col = self.band[d, : n - d]
            y[d:] += col * x[: n - d]
            y[: n - d] += col * x[d:]
        return y

    __matmul__ = matvec

    def __sub__(self, other: "SymBandMatrix") -> "SymBandMatrix":
        return _band_combine(self, other, -1.0)

    def __add__(self, other: "SymBandMatrix") -> "SymBandMatrix":
        return _band_combine(self, other, 1.0)

    def norm_inf(self) -> float:
        return float(np.abs(self.to_dense()).sum(axis=1).max())


def _band_combine(a: SymBandMatrix, b: SymBandMatrix, sign: float) -> SymBandMatrix:
    if a.dimension != b.dimension:
        raise ValueError("dimension mismatch")
    bw = max(a.half_bandwidth, b.half_bandwidth)
    out = np.zeros((bw + 1, a.dimension))
    out[: a.band.shape[0]] += a.band
    out[: b.band.shape[0]] += sign * b.band
    return SymBandMatrix(out)


def bandwidth_bound(mesh: Mesh1D) -> int:
    """Half bandwidth guaranteed to hold every nonzero of K."""
    return int(math.ceil((mesh.delta + 2.0 * mesh.h_max) / mesh.h_min))


def mass_matrix(mesh: Mesh1D) -> SymBandMatrix:
    h = mesh.spacings
    n = mesh.num_dofs
    band = np.zeros((2, n))
    band[0, :-1] += h / 3.0
    band[0, 1:] += h / 3.0
    band[1, :-1] = h / 6.0
    return SymBandMatrix(band)


def convolution_matrix(mesh: Mesh1D, kernel: Kernel, order: int = K_QUAD_ORDER) -> SymBandMatrix:
    x = mesh.nodes
    d = kernel.delta
    nel = mesh.num_elements
    n = mesh.num_dofs
    bw = min(bandwidth_bound(mesh), n - 1)
    band = np.zeros((bw + 1, n))
    cuts_all = np.concatenate([x - d, x, x + d])

    for e in range(nel):
        xa, xb = x[e], x[e + 1]
        h = xb - xa
        cuts = split_points(np.array([xa, xb]), cuts_all)
        X, W = quadrature_points(cuts, order)
        X = X.ravel()
        W = W.ravel()
        psi = np.stack([(xb - X) / h, (X - xa) / h])

        # y-elements within reach of the kernel
        ys = np.nonzero((x[1:] >= xa - d) & (x[:-1] <= xb + d))[0]
        ya = x[ys][:, None]
        yb = x[ys + 1][:, None]
        hy = yb - ya
        lo = ya - X
        hi = yb - X
        m0 = moment(kernel, 0, lo, hi)
        m1 = moment(kernel, 1, lo, hi)
        # int over the y-element of the left / right local hat times gamma(y - x)
        g_left = ((yb - X) * m0 - m1) / hy
        g_right = ((X - ya) * m0 + m1) / hy

        for a in range(2):
            r = e + a
            wa = psi[a] * W
            for g, c in ((g_left, ys), (g_right, ys + 1)):
                vals = g @ wa
                keep = c <= r
                np.add.at(band, (r - c[keep], c[keep]), vals[keep])
    return SymBandMatrix(band)


def stiffness(mesh: Mesh1D, kernel: Kernel, order: int = K_QUAD_ORDER) -> SymBandMatrix:
    """``A = M - K``; symmetric positive definite."""
    if kernel.delta >= 0.5:
        raise AssemblyError(f"delta = {kernel.delta} >= 1/2 is not supported")
    if mesh.delta != kernel.delta:
        raise AssemblyError(f"mesh delta {mesh.delta} differs from kernel delta {kernel.delta}")
    return mass_matrix(mesh) - convolution_matrix(mesh, kernel, order)


def load_vector(mesh: Mesh1D, forcing, order: int = LOAD_QUAD_ORDER) -> np.ndarray:
    """``d_i = int_0^1 b(x) phi_i(x) dx`` with elements split at the forcing's breakpoints."""
    bps = getattr(forcing, "breakpoints", ())
    x = mesh.nodes
    cuts = split_points(x, bps)
    X, W = quadrature_points(cuts, order)
    mid = 0.5 * (cuts[:-1] + cuts[1:])
    el = np.clip(np.searchsorted(x, mid) - 1, 0, mesh.num_elements - 1)
    xa = x[el][:, None]
    xb = x[el + 1][:, None]
    fw = np.asarray(forcing(X), dtype=float) * W
    left = (fw * (xb - X) / (xb - xa)).sum(axis=1)
    right = (fw * (X - xa) / (xb - xa)).sum(axis=1)
    d = np.zeros(mesh.num_dofs)
    np.add.at(d, el, left)
    np.add.at(d, el + 1, right)
    return d


def blocks(A: SymBandMatrix, mesh: Mesh1D):
    """Split ``A`` into interior/boundary blocks ``(A_II, A_IB, A_BB)``."""
    if A.dimension != mesh.num_dofs:
        raise AssemblyError(f"matrix dimension {A.dimension} does not match mesh ({mesh.num_dofs} dofs)")
    dense = A.to_dense()
    I = mesh.interior
    B = mesh.boundary
    return dense[np.ix_(I, I)], dense[np.ix_(I, B)], dense[np.ix_(B, B)]


def dump_triplets(A: SymBandMatrix, path) -> None:
    """Write the lower triangle as ``i j value`` lines, row-major, 17 significant digits."""
    n = A.dimension
    with open(path, "w") as fh:
        for i in range(n):
            for j in range(max(0, i - A.half_bandwidth), i + 1):
                v = A.band[i - j, j]
                if v != 0.0:
                    fh.write(f"{i} {j} {v:.17g}\n")


def load_triplets(path, n: int | None = None) -> SymBandMatrix:
    rows = np.loadtxt(path, ndmin=2)
    i = rows[:, 0].astype(int)
    j = rows[:, 1].astype(int)
    if n is None:
        n = int(i.max()) + 1
    bw = int((i - j).max()) if i.size else 0
    band = np.zeros((bw + 1, n))
    band[i - j, j] = rows[:, 2]
    return SymBandMatrix(band)
