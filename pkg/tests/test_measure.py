import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from star_kg import (KAPPA, StarNetwork, case_label, im_kernel_case, im_kernel_direct,
                     inner_product_H, norm_H, projection_E, verify_weight_systems,
                     weights_diagonal, weights_matrix, wronskian_w, xi)
from star_kg import functions
from star_kg.checks import check_case_formulas, check_weights
from star_kg.measure import window_rule


def test_kappa():
    assert KAPPA == 1 / np.pi


def test_two_equal_branches_weights(line):
    q = weights_diagonal(1.0, line).entries
    assert np.allclose(np.diag(q), 1 / (4 * np.pi), atol=1e-16, rtol=0)
    assert abs(q[0, 1]) == 0
    qm = weights_matrix(1.0, [0.7], line).entries
    assert np.max(np.abs(qm - q)) < 1e-10


def test_weights_below_spectrum(net3):
    assert np.all(weights_diagonal(-0.5, net3).entries == 0)


def test_multiplicity_layers(net3):
    for lam, p in ((0.5, 1), (2.0, 2), (7.0, 3)):
        d = weights_diagonal(lam, net3).diagonal
        assert np.count_nonzero(d) == p
        assert np.all(d[:p] > 0)


def test_matrix_route_and_systems(net3):
    res = check_weights(net3, projection=False)
    assert all(r.passed for r in res), [r.line() for r in res]


def test_systems_two_equal_branches(line):
    assert verify_weight_systems(1.0, line).max_residual < 1e-12


def test_case_a_entries_structurally_zero(net3):
    q = weights_diagonal(0.5, net3).entries
    assert np.all(q[1:, 1:] == 0)


def test_case_labels():
    assert case_label(2, 2, 1) == "a"
    assert case_label(0, 1, 2) == "b"
    assert case_label(1, 1, 2) == "b_diag"
    assert {case_label(0, 2, 1), case_label(2, 0, 1)} == {"c", "d"}


def test_below_spectrum_imaginary_part_vanishes(net3):
    x = np.linspace(0, 2, 5)
    for j in range(3):
        for k in range(3):
            assert np.all(im_kernel_case(j, k, 0, x, 0.3, -0.7, net3) == 0)


def test_case_a_closed_form(net3):
    lam = 2.0  # band (a_2, a_3): only branch index 2 decays
    x, xp = np.array([0.3, 1.2]), np.array([0.5, 2.0])
    rate = -xi(lam, 2, net3).imag
    expect = np.imag(1 / wronskian_w(lam, -1, net3)) * np.exp(-rate * (x + xp))
    assert np.max(np.abs(im_kernel_case(2, 2, 2, x, xp, lam, net3) - expect)) < 1e-15


def test_case_formulas_all_bands(net3):
    res = check_case_formulas(net3)
    assert res[0].passed and "b_diag" in res[0].detail, res[0].line()


@settings(max_examples=30, deadline=None)
@given(lam=st.floats(-2, 15), x=st.floats(0, 4), xp=st.floats(0, 4),
       j=st.integers(0, 2), k=st.integers(0, 2))
def test_case_formula_property(lam, x, xp, j, k):
    net3 = StarNetwork([1.0, 2.0, 0.5], [0.0, 1.0, 3.0])
    if net3.is_threshold(lam):
        return
    p = net3.band_index(lam)
    a = im_kernel_case(j, k, p, x, xp, lam, net3)
    b = im_kernel_direct(j, k, x, xp, lam, net3)
    assert abs(a - b) < 1e-12


def test_projection_below_spectrum_is_zero(net3, bump3):
    E = projection_E(-5.0, net3.a[0], bump3, net3)
    assert np.all(E(0, np.linspace(0, 8, 9)) == 0)


def test_cyclic_equals_symmetric(net3, bump3):
    a, b = 0.5, 6.0
    Es = projection_E(a, b, bump3, net3, "symmetric", x_max=12.0)
    Ec = projection_E(a, b, bump3, net3, "cyclic", x_max=12.0)
    x = np.linspace(0, 12, 241)
    num = sum(np.sum(np.abs(Es(k, x) - Ec(k, x)) ** 2) for k in range(3))
    den = sum(np.sum(np.abs(Es(k, x)) ** 2) for k in range(3))
    assert np.sqrt(num / den) < 1e-3


def test_idempotence(net3):
    # a sharp spectral edge leaves slowly decaying tails in x; a bump with little
    # content at the edge keeps the truncation at x_max out of the comparison
    bump3 = functions.gaussian(3, 10.0, 1.0, amplitude=np.array([1.0, -0.6, 0.3]))
    a, b = net3.a[0], net3.a[-1] + 10.0
    x_max = 30.0
    rule = window_rule(a, b, net3, 2 * x_max / np.sqrt(net3.c_arr.min()) + 1)
    E = projection_E(a, b, bump3, net3, x_max=x_max, rule=rule)
    EE = projection_E(a, b, E, net3, x_max=x_max, rule=rule)
    x = np.linspace(0, 20, 401)
    num = sum(np.sum(np.abs(EE(k, x) - E(k, x)) ** 2) for k in range(3))
    den = sum(np.sum(np.abs(bump3(k, x)) ** 2) for k in range(3))
    assert np.sqrt(num / den) < 1e-3


def test_completeness(net3, bump3):
    x = np.linspace(0, 10, 401)
    errs = []
    for top in (10.0, 40.0, 160.0):
        E = projection_E(net3.a[0], top, bump3, net3, x_max=10.0)
        num = sum(np.sum(np.abs(E(k, x) - bump3(k, x)) ** 2) for k in range(3))
        den = sum(np.sum(np.abs(bump3(k, x)) ** 2) for k in range(3))
        errs.append(np.sqrt(num / den))
    assert errs[0] > errs[1] > errs[2] and errs[2] < 1e-3


@settings(max_examples=8, deadline=None)
@given(amps=st.lists(st.floats(-2, 2), min_size=3, max_size=3),
       center=st.floats(4.5, 7.0), lo=st.floats(-1, 4), span=st.floats(0.2, 6))
def test_projection_positive(amps, center, lo, span):
    net3 = StarNetwork([1.0, 2.0, 0.5], [0.0, 1.0, 3.0])
    f = functions.gaussian(3, center, 0.5, amplitude=np.array(amps))
    E = projection_E(lo, lo + span, f, net3, x_max=f.support_radius)
    assert inner_product_H(E, f).real >= -1e-10
