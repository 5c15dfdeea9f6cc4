"""Radial, compactly supported, normalized interaction kernels in 1D.

Two variants are provided: the constant kernel ``1/(2 delta)`` and the
linear hat ``(1 - |s|/delta)/delta``.  Both integrate to one over
``[-delta, delta]`` and carry closed-form antiderivatives of ``s**k * gamma(s)``
so that assembly never needs numerical integration in the kernel variable.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class KernelVariant(str, enum.Enum):
    CONSTANT = "constant"
    HAT = "hat"


_ALIASES = {
    "constant": KernelVariant.CONSTANT,
    "const": KernelVariant.CONSTANT,
    "hat": KernelVariant.HAT,
    "linear": KernelVariant.HAT,
    "linearhat": KernelVariant.HAT,
}


@dataclass(frozen=True)
class Kernel:
    variant: KernelVariant
    delta: float

    def __post_init__(self):
        if not isinstance(self.variant, KernelVariant):
            object.__setattr__(self, "variant", parse_variant(self.variant))
        if not (np.isfinite(self.delta) and self.delta > 0):
            raise ValueError(f"kernel horizon must be positive, got delta={self.delta!r}")
        object.__setattr__(self, "delta", float(self.delta))

    @classmethod
    def constant(cls, delta: float) -> "Kernel":
        return cls(KernelVariant.CONSTANT, delta)

    @classmethod
    def hat(cls, delta: float) -> "Kernel":
        return cls(KernelVariant.HAT, delta)

    @property
    def gamma0(self) -> float:
        """Lower bound of the kernel on ``|s| <= delta/2``."""
        return 1.0 / (2.0 * self.delta)

    def __call__(self, s):
        return evaluate(self, s)


def parse_variant(name) -> KernelVariant:
    if isinstance(name, KernelVariant):
        return name
    key = str(name).strip().lower().replace("_", "").replace("-", "")
    try:
        return _ALIASES[key]
    except KeyError:
        raise ValueError(f"unknown kernel {name!r}; expected 'constant' or 'hat'") from None


def evaluate(kernel: Kernel, s):
    """Kernel value at offset ``s`` (scalar or array)."""
    s = np.asarray(s, dtype=float)
    d = kernel.delta
    inside = np.abs(s) <= d
    if kernel.variant is KernelVariant.CONSTANT:
        val = np.where(inside, 1.0 / (2.0 * d), 0.0)
    else:
        val = np.where(inside, (1.0 - np.abs(s) / d) / d, 0.0)
    return val if val.ndim else float(val)


def antiderivative(kernel: Kernel, k: int, s):
    """``F_k(s) = int_0^s t**k gamma(t) dt`` for ``k`` in 0..4, constant outside the support.

    Works elementwise on arrays; the kink of the hat at 0 and the cutoffs at
    ``+-delta`` are handled by clipping and a sign term, so differences of
    ``F_k`` give exact moments over arbitrary intervals.
    """
    if k not in (0, 1, 2, 3, 4):
        raise ValueError(f"moment order must be in 0..4, got {k}")
    d = kernel.delta
    s = np.clip(np.asarray(s, dtype=float), -d, d)
    if kernel.variant is KernelVariant.CONSTANT:
        return s ** (k + 1) / ((k + 1) * 2.0 * d)
    return s ** (k + 1) / ((k + 1) * d) - np.sign(s) * s ** (k + 2) / ((k + 2) * d * d)


def moment(kernel: Kernel, k: int, a, b):
    """Exact ``int_a^b s**k gamma(s) ds``; ``a`` and ``b`` may be arrays."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a > b):
        raise ValueError("moment interval must satisfy a <= b")
    val = antiderivative(kernel, k, b) - antiderivative(kernel, k, a)
    return val if np.ndim(val) else float(val)


def breakpoints(kernel: Kernel) -> list[float]:
    d = kernel.delta
    return [-d, 0.0, d]
