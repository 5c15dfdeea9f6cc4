"""Hybrid conforming DG solver for 1D nonlocal diffusion with integrable kernels."""

__version__ = "0.1.0"

from .kernel import Kernel, KernelVariant  # noqa: E402
from .mesh import Mesh1D, perturbed_mesh, uniform_mesh  # noqa: E402
from .assembly import SymBandMatrix, stiffness, load_vector  # noqa: E402
from .solver import cg_solve, cholesky_solve, spectral_condition_number  # noqa: E402
from .problems import ProblemSpec, example1, example2, example3  # noqa: E402
from .analysis import MeshFamily, run_study  # noqa: E402

__all__ = [
    "Kernel", "KernelVariant", "Mesh1D", "uniform_mesh", "perturbed_mesh", "SymBandMatrix",
    "stiffness", "load_vector", "cg_solve", "cholesky_solve", "spectral_condition_number",
    "ProblemSpec", "example1", "example2", "example3", "MeshFamily", "run_study",
]
