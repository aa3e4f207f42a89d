import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from star_kg import (EigenfunctionSpec, NetworkPoint, StarNetwork, bound_M, bound_N_gamma,
                     check_transmission, conv_sqrt, eigenfunction, eval_F, kernel_values,
                     ode_residual, s_coeff, wronskian_w, xi, xi_all)
from star_kg.errors import ThresholdSingularity

from star_kg.checks import check_eigenfunctions, check_wronskian_bound


def test_conv_sqrt_examples():
    assert conv_sqrt(4) == 2
    assert conv_sqrt(-1) == -1j
    assert abs(conv_sqrt(1j) - np.sqrt(2) / 2 * (1 + 1j)) < 1e-15


def test_conv_sqrt_square_and_conjugation(rng):
    z = rng.normal(size=10_000) * 10 ** rng.uniform(-3, 3, 10_000) + \
        1j * rng.normal(size=10_000) * 10 ** rng.uniform(-3, 3, 10_000)
    z[:100] = -np.abs(z[:100].real)  # negative real axis
    r = conv_sqrt(z)
    assert np.max(np.abs(r * r - z) / np.abs(z)) < 1e-14
    off_axis = z.imag != 0
    assert np.all(conv_sqrt(np.conj(z[off_axis])) == np.conj(r[off_axis]))
    # arg of the root lies in [-pi/2, pi/2)
    ang = np.angle(r)
    assert np.all((ang >= -np.pi / 2) & (ang < np.pi / 2 + 1e-15))


def test_xi_examples():
    n1 = StarNetwork([1, 4], [0, 1])
    assert xi(4, 0, n1) == 2
    assert abs(xi(2, 1, n1) - 0.5) < 1e-15
    assert xi(-1, 0, n1) == -1j


def test_xi_real_or_decaying_by_band(net3):
    for lam, p in ((0.5, 1), (2.0, 2), (5.0, 3)):
        x = xi_all(lam, net3)
        for k in range(3):
            if k < p:
                assert x[k].imag == 0 and x[k].real > 0
            else:
                assert x[k].real == 0 and x[k].imag < 0


def test_s_coeff_example_and_threshold():
    net = StarNetwork([1, 1, 1], [0, 0, 0])
    assert abs(s_coeff(1.0, 0, net) + 2) < 1e-15
    with pytest.raises(ThresholdSingularity):
        s_coeff(0.0, 1, net)


def test_wronskian_examples():
    net = StarNetwork([1, 1, 1], [0, 0, 0])
    assert abs(wronskian_w(4.0, -1, net) + 6j) < 1e-14
    net2 = StarNetwork([1, 1], [0, 4])
    w = wronskian_w(2.0, -1, net2)
    assert abs(w - (-np.sqrt(2) - 1j * np.sqrt(2))) < 1e-14
    assert abs(abs(w) ** 2 - 4.0) < 1e-13


@settings(max_examples=30, deadline=None)
@given(lam=st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False),
       c=st.lists(st.floats(0.1, 10), min_size=2, max_size=5))
def test_wronskian_equal_potentials(lam, c):
    net = StarNetwork(c, [1.0] * len(c))
    w = wronskian_w(lam, -1, net)
    assert abs(abs(w) ** 2 - np.sum(np.sqrt(c)) ** 2 * abs(lam - 1.0)) <= 1e-12 * (1 + abs(w) ** 2)


def test_wronskian_conjugation(net3, rng):
    lam = rng.normal(size=200) * 5 + 1j * rng.normal(size=200)
    assert np.max(np.abs(np.conj(wronskian_w(lam, -1, net3)) + wronskian_w(np.conj(lam), -1, net3))) < 1e-14


def test_wronskian_lower_bound_grid(net3):
    res = check_wronskian_bound(net3)
    assert res[0].passed, res[0].line()


def test_eigenfunction_vertex_value(net3):
    for lam in (0.3, 2.0 - 1j, 9.0 + 0.1j):
        for j in range(3):
            for k in range(3):
                assert abs(eval_F(EigenfunctionSpec(lam, j, -1), NetworkPoint(k, 0.0), net3) - 1) < 1e-15


def test_plane_wave_modulus_above_all_thresholds(net3):
    x = np.linspace(0, 20, 300)
    F = eigenfunction(EigenfunctionSpec(6.0, 0, -1), net3)
    for k in (1, 2):
        assert np.max(np.abs(np.abs(F(k, x)) - 1.0)) < 1e-13


def test_decay_off_the_real_axis(net3):
    F = eigenfunction(EigenfunctionSpec(4.0 - 0.5j, 1, -1), net3)
    x = np.linspace(0, 30, 400)
    for k in (0, 2):
        a = np.abs(F(k, x))
        assert np.all(np.diff(a) < 0)
        # off branch j the eigenfunction is a single exponential exp(-i xi x)
        assert np.max(np.abs(a - np.exp(xi(4.0 - 0.5j, k, net3).imag * x))) < 1e-13


def test_eigenfunction_residual_and_transmission(net3):
    res = check_eigenfunctions(net3)
    assert all(r.passed for r in res), [r.line() for r in res]


def test_ode_residual_derivatives_match_finite_differences(net3):
    spec = EigenfunctionSpec(2.5 - 0.2j, 2, 1)
    F = eigenfunction(spec, net3)
    x = np.linspace(0.5, 3, 20)
    h = 1e-5
    for k in range(3):
        fd = (F(k, x + h) - F(k, x - h)) / (2 * h)
        assert np.max(np.abs(fd - F(k, x, 1))) < 1e-7
    assert np.max(np.abs(ode_residual(spec, 0, x, net3))) < 1e-12


def test_bound_M_examples():
    eq = StarNetwork([1, 1, 1], [0, 0, 0])
    assert bound_M(0.5, 0.1, eq) == 2.0 and bound_M(40.0, 0.1, eq) == 2.0
    net = StarNetwork([1, 2, 0.5], [0, 1, 3])
    assert bound_M(1.0, 0.1, net) == np.inf


def test_bound_M_dominates_s(net3):
    delta = 0.5
    for lam in np.linspace(0.05, 12, 60):
        if net3.is_threshold(lam):
            continue
        M = bound_M(lam, delta, net3)
        for eps in np.linspace(1e-6, delta, 15):
            for j in range(3):
                assert abs(s_coeff(lam - 1j * eps, j, net3)) <= M


def test_kernel_envelope_sweep(net3, rng):
    for _ in range(300):
        lam = rng.uniform(0.05, 12.0)
        delta = rng.uniform(0.01, 1.0)
        eps = rng.uniform(0.0, delta)
        env = bound_N_gamma(lam, delta, net3)
        jb, kb = rng.integers(3, size=2)
        x, xp = rng.uniform(0, 5, 2)
        assert abs(kernel_values(lam - 1j * eps, jb, x, kb, xp, net3)) <= env(x, xp)


def test_envelope_limits():
    net = StarNetwork([1, 2, 0.5], [0, 1, 3])
    Ns = [bound_N_gamma(lam, 0.5, net).N for lam in (10.0, 1e3, 1e5, 1e7)]
    assert all(b < a for a, b in zip(Ns, Ns[1:])) and Ns[-1] < 1e-3
    eq = StarNetwork([1, 1, 1], [2, 2, 2])
    assert bound_N_gamma(2.0, 0.5, eq).N == np.inf
