import numpy as np
import pytest

from star_kg import (AnalyticFunction, KernelQuery, NetworkPoint, StarNetwork, apply_resolvent,
                     check_limiting_absorption, inner_product_H, kernel_K, kernel_values)
from star_kg import functions
from star_kg.checks import check_kernel_symmetry, check_resolvent
from star_kg.errors import NonCompactSupport, PreconditionError, SpectrumPoint


def test_zero_input(net3):
    R = apply_resolvent(AnalyticFunction.zero(3), 1.0 + 1j, net3)
    assert np.all(R(1, np.linspace(0, 5, 11)) == 0)


def test_free_line_kernel(line, rng):
    # two equal branches: y = x on branch 0, y = -x on branch 1
    for lam in (2.0 + 1j, 2.0 - 1j, -3.0 + 0.5j, 0.7 - 4j):
        k = np.sqrt(complex(lam))
        k = k if k.imag > 0 else -k
        for _ in range(50):
            j, m = rng.integers(2, size=2)
            x, xp = rng.uniform(0, 4, 2)
            y = x if j == 0 else -x
            yp = xp if m == 0 else -xp
            # (lam + d²/dy²) u = f  has the outgoing Green function below
            green = np.exp(1j * k * abs(y - yp)) / (2j * k)
            assert abs(kernel_values(lam, j, x, m, xp, line) - green) < 1e-14


def test_kernel_query_wrapper(net3):
    q = KernelQuery(NetworkPoint(0, 0.4), NetworkPoint(2, 1.1), 2.0 - 0.3j)
    assert kernel_K(q, net3) == kernel_values(2.0 - 0.3j, 0, 0.4, 2, 1.1, net3)


def test_residual_and_fd_oracle(net3):
    res = check_resolvent(net3)
    assert all(r.passed for r in res), [r.line() for r in res]


def test_partner_independence(net3, bump3):
    lam = 0.5 + 0.7j
    R1 = apply_resolvent(bump3, lam, net3)
    R2 = apply_resolvent(bump3, lam, net3, partner_shift=2)
    x = np.linspace(0, 10, 101)
    for k in range(3):
        assert np.max(np.abs(R1(k, x) - R2(k, x))) < 1e-8


def test_hermitian_symmetry(net3, bump3):
    g = functions.gaussian(3, 4.0, 0.4, amplitude=np.array([0.2, 1.0, -0.5j]))
    lam = 1.5 + 0.8j
    Rf = apply_resolvent(bump3, lam, net3)
    Rg = apply_resolvent(g, np.conj(lam), net3)
    lhs = inner_product_H(Rf, g)
    rhs = inner_product_H(bump3, Rg)
    assert abs(lhs - rhs) < 1e-10 * abs(lhs)


def test_real_spectral_parameter_rejected(net3, bump3):
    with pytest.raises(SpectrumPoint):
        apply_resolvent(bump3, 2.0, net3)
    R = apply_resolvent(bump3, -1.0, net3)  # below the spectrum is fine
    assert np.all(np.isfinite(R(0, np.linspace(0, 5, 5))))


def test_non_compact_rejected(net3):
    e = AnalyticFunction.same_on_all(3, lambda x: np.exp(-x), decaying=True)
    with pytest.raises(NonCompactSupport):
        apply_resolvent(e, 1 + 1j, net3)


def test_conjugation_and_diagonal(net3):
    res = check_kernel_symmetry(net3)
    assert all(r.passed for r in res), [r.line() for r in res]


def test_limiting_absorption_above_all_thresholds(net3, rng):
    qs = [KernelQuery(NetworkPoint(int(rng.integers(3)), rng.uniform(0, 3)),
                      NetworkPoint(int(rng.integers(3)), rng.uniform(0, 3)), 0j) for _ in range(50)]
    rep = check_limiting_absorption(6.0, 10.0 ** -np.arange(2, 11), qs, net3)
    assert rep.max_final_defect < 1e-8
    assert rep.envelope_ok and rep.monotone and rep.passed


def test_limiting_absorption_rejects_below_spectrum(net3):
    with pytest.raises(PreconditionError):
        check_limiting_absorption(-0.5, [1e-2, 1e-3], [], net3)
