"""Piecewise-smooth functions on [0, 1] and breakpoint-aware Gauss quadrature."""

from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np


@lru_cache(maxsize=None)
def gauss_legendre(order: int):
    """Nodes and weights on the reference interval [0, 1]."""
    t, w = np.polynomial.legendre.leggauss(order)
    t = 0.5 * (t + 1.0)
    w = 0.5 * w
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def split_points(nodes, *extra) -> np.ndarray:
    """Sorted union of ``nodes`` and the extra breakpoints falling inside ``[nodes[0], nodes[-1]]``."""
    nodes = np.asarray(nodes, dtype=float)
    lo, hi = nodes[0], nodes[-1]
    pts = [nodes]
    for e in extra:
        e = np.asarray(e, dtype=float).ravel()
        pts.append(e[(e > lo) & (e < hi)])
    return np.unique(np.concatenate(pts))


def quadrature_points(cuts: np.ndarray, order: int):
    """Gauss points and weights on every interval ``[cuts[k], cuts[k+1]]``.

    Returns arrays of shape ``(len(cuts) - 1, order)``.
    """
    t, w = gauss_legendre(order)
    a = cuts[:-1, None]
    length = np.diff(cuts)[:, None]
    return a + length * t, length * w


class PiecewiseFn:
    """A scalar function with the points where its smoothness may fail.

    The domain defaults to [0, 1]; collar data passes its own ``domain``.

    ``func`` must accept numpy arrays.  ``derivative`` is optional and used for
    H1 error measurement.
    """

    def __init__(
        self,
        func: Callable,
        breakpoints=(),
        derivative: Callable | None = None,
        smoothness: str = "",
        name: str = "",
        domain=(0.0, 1.0),
    ):
        bps = np.unique(np.asarray(breakpoints, dtype=float).ravel())
        if bps.size and (bps[0] < domain[0] or bps[-1] > domain[1]):
            raise ValueError(f"breakpoints must lie in [{domain[0]}, {domain[1]}]")
        self.domain = (float(domain[0]), float(domain[1]))
        self._func = func
        self.breakpoints = bps
        self._derivative = derivative
        self.smoothness = smoothness
        self.name = name

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.asarray(self._func(x), dtype=float)
        if out.shape != x.shape:
            out = np.broadcast_to(out, x.shape).copy()
        return out if out.ndim else float(out)

    @property
    def has_derivative(self) -> bool:
        return self._derivative is not None

    def derivative(self, x):
        if self._derivative is None:
            raise ValueError(f"no derivative registered for {self.name or 'function'}")
        x = np.asarray(x, dtype=float)
        out = np.asarray(self._derivative(x), dtype=float)
        if out.shape != x.shape:
            out = np.broadcast_to(out, x.shape).copy()
        return out if out.ndim else float(out)

    def __repr__(self):
        return f"PiecewiseFn({self.name or self._func!r}, breakpoints={self.breakpoints.tolist()})"


class PiecewiseLinear(PiecewiseFn):
    """Continuous piecewise-linear interpolant of nodal values."""

    def __init__(self, nodes, values, name: str = "u_h"):
        nodes = np.asarray(nodes, dtype=float)
        values = np.asarray(values, dtype=float)
        if nodes.shape != values.shape:
            raise ValueError("nodes and values must have the same length")
        self.nodes = nodes
        self.values = values
        self.slopes = np.diff(values) / np.diff(nodes)
        super().__init__(self._eval, nodes, self._slope, "C0, piecewise P1", name)

    def _eval(self, x):
        return np.interp(x, self.nodes, self.values)

    def _slope(self, x):
        # Quadrature points never sit on a node; at a node the left element wins.
        i = np.searchsorted(self.nodes, x, side="left") - 1
        i = np.clip(i, 0, self.slopes.size - 1)
        return self.slopes[i]


def constant(c: float, breakpoints=()) -> PiecewiseFn:
    return PiecewiseFn(lambda x: np.full_like(x, c, dtype=float), breakpoints,
                       lambda x: np.zeros_like(x, dtype=float), "C-infinity", f"{c:g}")
