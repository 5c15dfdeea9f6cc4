"""Meshes of the unit interval: uniform, randomly perturbed and pinned."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Generator used for perturbations; recorded in study metadata.
RNG_NAME = "numpy.random.PCG64"


class MeshError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Mesh1D:
    """Sorted nodes ``0 = x_0 < ... < x_M = 1``.

    The collar ``(-delta, 0] U [1, 1 + delta)`` is implicit; no element lives
    there because every basis function vanishes on it.
    """

    nodes: np.ndarray
    delta: float
    family: str = "uniform"
    seed: int | None = None
    pinned: tuple = field(default=())

    def __post_init__(self):
        x = np.array(self.nodes, dtype=float)
        if x.ndim != 1 or x.size < 3:
            raise MeshError("a mesh needs at least two elements")
        if x[0] != 0.0 or x[-1] != 1.0:
            raise MeshError("mesh endpoints must be exactly 0 and 1")
        if np.any(np.diff(x) <= 0):
            raise MeshError("mesh nodes must be strictly increasing")
        if not self.delta > 0:
            raise MeshError("delta must be positive")
        x.setflags(write=False)
        object.__setattr__(self, "nodes", x)

    @property
    def num_elements(self) -> int:
        return self.nodes.size - 1

    @property
    def num_dofs(self) -> int:
        return self.nodes.size

    @property
    def spacings(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def h_max(self) -> float:
        return float(self.spacings.max())

    @property
    def h_min(self) -> float:
        return float(self.spacings.min())

    @property
    def quasi_uniformity(self) -> float:
        return self.h_max / self.h_min

    @property
    def interior(self) -> np.ndarray:
        """Indices of the inner nodes (NI)."""
        return np.arange(1, self.num_elements)

    @property
    def boundary(self) -> np.ndarray:
        """Indices of the nodes on the domain boundary (NB)."""
        return np.array([0, self.num_elements])

    def locate(self, x: float) -> int:
        return locate(self, x)

    def __eq__(self, other):
        if not isinstance(other, Mesh1D):
            return NotImplemented
        return self.delta == other.delta and np.array_equal(self.nodes, other.nodes)

    def __hash__(self):
        return hash((self.delta, self.nodes.tobytes()))


def uniform_mesh(M: int, delta: float) -> Mesh1D:
    if int(M) != M or M < 2:
        raise MeshError(f"need at least 2 elements, got M={M}")
    M = int(M)
    nodes = np.arange(M + 1, dtype=float) / M
    return Mesh1D(nodes, delta, family="uniform")


def elements_for_ratio(delta_over_h: int, delta: float) -> int:
    """Element count ``M`` for which a uniform mesh has ``delta/h = delta_over_h``."""
    M = delta_over_h / delta
    Mi = int(round(M))
    if Mi < 2 or abs(M - Mi) > 1e-9 * max(1.0, M):
        raise MeshError(f"delta/h = {delta_over_h} with delta = {delta} does not give an integer element count")
    return Mi


def perturbed_mesh(
    M: int,
    delta: float,
    seed: int,
    amplitude: float = 0.1,
    pinned=(),
) -> Mesh1D:
    """Uniform nodes ``i/M`` shifted by i.i.d. ``U[-amplitude*h, amplitude*h]``.

    Endpoints are never moved. Nodes coinciding with a point in ``pinned``
    (which must lie on the uniform grid) keep offset zero; the random stream
    is drawn for all interior nodes regardless, so pinning does not change
    the offsets of the other nodes for a given seed.
    """
    if int(M) != M or M < 2:
        raise MeshError(f"need at least 2 elements, got M={M}")
    M = int(M)
    if not 0 <= amplitude < 0.5:
        raise MeshError(f"perturbation amplitude must lie in [0, 0.5), got {amplitude}")
    h = 1.0 / M
    base = np.arange(M + 1, dtype=float) / M
    pins = []
    for p in pinned:
        i = int(round(p * M))
        if not (0 <= i <= M) or abs(i / M - p) > 1e-12:
            raise MeshError(f"pinned point {p} is not a node of the uniform grid with M={M}")
        pins.append(i)
    rng = np.random.Generator(np.random.PCG64(seed))
    eps = rng.uniform(-amplitude * h, amplitude * h, size=M - 1)
    nodes = base.copy()
    nodes[1:M] += eps
    for i in pins:
        nodes[i] = base[i]
    nodes[0], nodes[M] = 0.0, 1.0
    return Mesh1D(
        nodes,
        delta,
        family="pinned" if pins else "perturbed",
        seed=seed,
        pinned=tuple(float(p) for p in pinned),
    )


def locate(mesh: Mesh1D, x: float) -> int:
    """Index of the element whose closed interval holds ``x`` (lower index on ties)."""
    if not 0.0 <= x <= 1.0:
        raise MeshError(f"point {x} lies outside [0, 1]")
    i = int(np.searchsorted(mesh.nodes, x, side="left")) - 1
    return min(max(i, 0), mesh.num_elements - 1)
