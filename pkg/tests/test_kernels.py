import math
import random

import numpy as np
import pytest
from scipy.integrate import quad

import cubiclab as cl
from cubiclab.kernels import KernelParams, choose_T, kernel_K, kernel_hat, sandwich_check


def test_kernel_at_zero():
    for sign, expect in [("plus", 2.5), ("minus", 1.5)]:
        kp = KernelParams(eta=1.0, rho=0.5, sign=sign)
        assert kernel_K(0.0, kp) == pytest.approx(expect)


def test_kernel_minus_example():
    kp = KernelParams(eta=1.0, rho=0.5, sign="minus")
    assert kernel_K(1.0, kp) == pytest.approx(-2 / math.pi**2)
    assert kernel_K(1.0, kp) == pytest.approx(-0.20264236728467555)


def test_kernel_even_and_bounded():
    rng = random.Random(3)
    kp = KernelParams(eta=0.2, rho=0.05, sign="plus")
    for _ in range(200):
        a = rng.uniform(-50, 50)
        va, vm = kernel_K(a, kp), kernel_K(-a, kp)
        assert va == pytest.approx(vm, abs=1e-15)
        assert abs(va) <= 2 * kp.eta + kp.rho + 1e-15
        if a != 0:
            assert abs(va) <= 1 / (math.pi**2 * kp.rho * a * a) + 1e-15


def test_kernel_params_invariants():
    with pytest.raises(ValueError):
        KernelParams(eta=0.1, rho=0.2, sign="minus")
    with pytest.raises(ValueError):
        KernelParams(eta=0.1, rho=0.05, sign="both")


def test_hat_plateau_and_support():
    kp_p = KernelParams(eta=1.0, rho=0.5, sign="plus")
    kp_m = KernelParams(eta=1.0, rho=0.5, sign="minus")
    assert kernel_hat(0.0, kp_p) == 1.0 and kernel_hat(0.0, kp_m) == 1.0
    assert kernel_hat(1.6, kp_p) == 0.0  # beyond eta + rho
    assert kernel_hat(1.0 - 0.25, kp_m) == pytest.approx(0.5)  # ramp midpoint
    assert kernel_hat(1.0, kp_m) == 0.0
    assert kernel_hat(1.0, kp_p) == 1.0  # plus plateau reaches eta


def test_hat_sandwiches_indicator_pointwise():
    kp_p = KernelParams(eta=0.3, rho=0.1, sign="plus")
    kp_m = KernelParams(eta=0.3, rho=0.1, sign="minus")
    for t in np.linspace(-0.8, 0.8, 401):
        u = cl.indicator_U(float(t), 0.3)
        assert kernel_hat(t, kp_m) <= u + 1e-15
        assert u <= kernel_hat(t, kp_p) + 1e-15


def test_transform_matches_quadpack_spot():
    kp = KernelParams(eta=0.5, rho=0.1, sign="plus")
    for t in (0.0, 0.3, 0.55, 0.7):
        val, _ = quad(lambda a: kernel_K(a, kp) * math.cos(2 * math.pi * a * t),
                      0, 2000, limit=20000)
        assert 2 * val == pytest.approx(kernel_hat(t, kp), abs=5e-3)


@pytest.mark.parametrize("eta", [0.05, 0.5])
def test_sandwich_check(eta):
    rho = eta / math.log(100)
    grid = np.linspace(-2 * eta, 2 * eta, 60)
    rep = sandwich_check(eta, rho, grid.tolist(), 1e-4)
    assert rep.max_numeric_dev_plus <= 1e-4 + rep.tail_bound
    assert rep.max_numeric_dev_minus <= 1e-4 + rep.tail_bound


def test_transform_integral_at_zero_is_plateau():
    # integral of K over the line equals hat(0) = 1
    kp = KernelParams(eta=0.25, rho=0.05, sign="minus")
    val, _ = quad(lambda a: kernel_K(a, kp), 0, 4000, limit=40000)
    assert 2 * val == pytest.approx(1.0, abs=2e-3)


def test_small_alpha_taylor_bound():
    rng = random.Random(17)
    P = 100.0
    for sign in ("plus", "minus"):
        kp = KernelParams.from_P(0.05, P, sign)
        m = kp.outer_width
        for _ in range(100):
            a = rng.uniform(-(P**-0.5), P**-0.5)
            bound = (math.pi**2 / 6) * a * a * (kp.rho**2 + m * m) * m
            assert abs(kernel_K(a, kp) - m) <= bound + 1e-15


def test_choose_T():
    assert choose_T(1.0, "log") == 1.0
    assert choose_T(1.0, "pow") == 1.0
    assert choose_T(math.exp(10), "log") == pytest.approx(10.0)
    ps = [1.0, 2.0, 10.0, 1e3, 1e6]
    for policy in ("log", "pow"):
        ts = [choose_T(p, policy) for p in ps]
        assert all(a <= b for a, b in zip(ts, ts[1:]))
        assert all(t <= p for t, p in zip(ts, ps))


def test_from_P_ties_rho_to_schedule():
    kp = KernelParams.from_P(0.05, 100.0, "plus", policy="pow", theta=1.0)
    assert kp.rho == pytest.approx(0.05 / math.log(100))
