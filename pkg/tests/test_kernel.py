import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nldg.kernel import Kernel, KernelVariant, antiderivative, evaluate, moment, parse_variant
from oracles import quad_moment

DELTA = 0.4
KERNELS = [Kernel.constant(DELTA), Kernel.hat(DELTA)]


@pytest.mark.parametrize("kernel, s, expected", [
    (Kernel.constant(0.4), 0.0, 1.25),
    (Kernel.constant(0.4), 0.4, 1.25),
    (Kernel.constant(0.4), 0.41, 0.0),
    (Kernel.hat(0.4), 0.0, 2.5),
    (Kernel.hat(0.4), 0.2, 1.25),
    (Kernel.hat(0.4), -0.2, 1.25),
    (Kernel.hat(0.4), 0.4, 0.0),
    (Kernel.hat(0.4), -1.0, 0.0),
])
def test_kernel_values(kernel, s, expected):
    assert evaluate(kernel, s) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("kernel", KERNELS, ids=lambda k: k.variant.value)
def test_normalization(kernel):
    assert moment(kernel, 0, -DELTA, DELTA) == pytest.approx(1.0, abs=1e-12)
    # integrating past the support changes nothing
    assert moment(kernel, 0, -5.0, 5.0) == pytest.approx(1.0, abs=1e-12)


def test_second_moment_constant():
    assert moment(Kernel.constant(DELTA), 2, -DELTA, DELTA) == pytest.approx(DELTA**2 / 3, abs=1e-15)


def test_second_moment_hat():
    assert moment(Kernel.hat(DELTA), 2, -DELTA, DELTA) == pytest.approx(DELTA**2 / 6, abs=1e-15)


@pytest.mark.parametrize("kernel", KERNELS, ids=lambda k: k.variant.value)
def test_moments_against_adaptive_quadrature(kernel):
    rng = np.random.default_rng(1234)
    for _ in range(100):
        k = int(rng.integers(0, 5))
        a, b = np.sort(rng.uniform(-0.6, 0.6, size=2))
        assert moment(kernel, k, a, b) == pytest.approx(quad_moment(kernel, k, a, b), abs=1e-10)


@pytest.mark.parametrize("kernel", KERNELS, ids=lambda k: k.variant.value)
@settings(max_examples=60, deadline=None)
@given(a=st.floats(-1, 1), m=st.floats(-1, 1), b=st.floats(-1, 1), k=st.integers(0, 4))
def test_moment_additivity(kernel, a, m, b, k):
    a, m, b = sorted((a, m, b))
    whole = moment(kernel, k, a, b)
    assert whole == pytest.approx(moment(kernel, k, a, m) + moment(kernel, k, m, b), abs=1e-14)


@pytest.mark.parametrize("kernel", KERNELS, ids=lambda k: k.variant.value)
@settings(max_examples=60, deadline=None)
@given(s=st.floats(-2, 2))
def test_symmetric_and_nonnegative(kernel, s):
    assert evaluate(kernel, s) == evaluate(kernel, -s)
    assert evaluate(kernel, s) >= 0.0


@pytest.mark.parametrize("kernel", KERNELS, ids=lambda k: k.variant.value)
def test_lower_bound_on_half_horizon(kernel):
    s = np.linspace(-DELTA / 2, DELTA / 2, 201)
    assert np.all(evaluate(kernel, s) >= kernel.gamma0 - 1e-15)


def test_odd_moments_vanish_on_symmetric_window():
    for kernel in KERNELS:
        for k in (1, 3):
            assert abs(moment(kernel, k, -DELTA, DELTA)) < 1e-15


def test_antiderivative_is_constant_outside_support():
    k = Kernel.hat(DELTA)
    assert antiderivative(k, 2, 3.0) == antiderivative(k, 2, DELTA)
    assert antiderivative(k, 1, -3.0) == antiderivative(k, 1, -DELTA)


def test_array_evaluation_keeps_shape():
    s = np.zeros((3, 4))
    assert evaluate(Kernel.hat(DELTA), s).shape == (3, 4)
    assert moment(Kernel.hat(DELTA), 0, -s, s + 0.1).shape == (3, 4)


@pytest.mark.parametrize("name, variant", [
    ("constant", KernelVariant.CONSTANT), ("Const", KernelVariant.CONSTANT),
    ("hat", KernelVariant.HAT), ("linear-hat", KernelVariant.HAT), ("LinearHat", KernelVariant.HAT),
])
def test_parse_variant(name, variant):
    assert parse_variant(name) is variant
    assert Kernel(name, 0.3).variant is variant


@pytest.mark.parametrize("bad", [0.0, -0.1, float("nan"), float("inf")])
def test_rejects_bad_horizon(bad):
    with pytest.raises(ValueError):
        Kernel.constant(bad)


def test_rejects_unknown_variant_and_order():
    with pytest.raises(ValueError):
        Kernel("gaussian", 0.4)
    with pytest.raises(ValueError):
        moment(Kernel.hat(0.4), 5, 0.0, 0.1)
    with pytest.raises(ValueError):
        moment(Kernel.hat(0.4), 0, 0.2, 0.1)
