import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from star_kg import (AnalyticFunction, SpectralFunction, StarNetwork, apply_A, apply_function_of_A,
                     inner_product_H, inner_sigma, norm_H, norm_sigma, projection_E,
                     sobolev_membership, spectral_grid, transform_V, transform_Z, xi)
from star_kg import functions
from star_kg.checks import domain_network
from star_kg.errors import NonCompactSupport
from star_kg.transform import auto_grid, indicator


def _rel_l2(f, g, n, x):
    num = sum(np.sum(np.abs(f(k, x) - g(k, x)) ** 2) for k in range(n))
    den = sum(np.sum(np.abs(g(k, x)) ** 2) for k in range(n))
    return np.sqrt(num / den)


def test_indicator_closed_form(net3):
    f = functions.indicator(3, 0, 0.0, 1.0)
    grid = spectral_grid(net3, 20.0, 1.0)
    Vf = transform_V(f, grid, net3)
    for k in (1, 2):
        lam = Vf.nodes(k)
        z = xi(lam, 0, net3)
        expect = (np.exp(1j * z) - 1) / (1j * z)
        assert np.max(np.abs(Vf.components[k] - expect)) < 1e-13


def test_components_live_above_thresholds(net3, bump3):
    grid = spectral_grid(net3, 20.0, bump3.support_radius)
    assert not np.any(np.isin(grid.nodes, net3.a))
    Vf = transform_V(bump3, grid, net3)
    for k in range(3):
        assert Vf.components[k].size == np.count_nonzero(grid.nodes > net3.a[k])
        assert np.all(Vf.nodes(k) > net3.a[k])


def test_zero_maps(net3):
    grid = spectral_grid(net3, 10.0, 5.0)
    V0 = transform_V(AnalyticFunction.zero(3), grid, net3)
    assert all(np.all(c == 0) for c in V0.components)
    assert norm_sigma(V0) == 0.0
    Z0 = transform_Z(V0, net3)
    assert np.all(Z0(1, np.linspace(0, 5, 6)) == 0)


def test_norm_of_unit_components(net3):
    grid = spectral_grid(net3, 10.0, 1.0)
    one = SpectralFunction.from_callable(grid, net3, lambda k, lam: np.ones_like(lam))
    v = norm_sigma(one)
    assert np.isfinite(v) and v > 0


def test_non_compact_rejected(net3):
    e = AnalyticFunction.same_on_all(3, lambda x: np.exp(-x), decaying=True)
    with pytest.raises(NonCompactSupport):
        transform_V(e, spectral_grid(net3, 10.0, 5.0), net3)


def test_plancherel_single(net3, bump3):
    grid = auto_grid(bump3, net3)
    nf = norm_H(bump3) ** 2
    assert abs(norm_sigma(transform_V(bump3, grid, net3)) ** 2 - nf) / nf < 1e-4


def test_round_trip(net3, bump3):
    grid = auto_grid(bump3, net3)
    back = transform_Z(transform_V(bump3, grid, net3), net3)
    x = np.linspace(0, bump3.support_radius, 500)
    for k in range(3):
        assert np.max(np.abs(back(k, x) - bump3(k, x))) < 1e-3


@settings(max_examples=10, deadline=None)
@given(alpha=st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_linearity(alpha):
    net = StarNetwork([1.0, 2.0, 0.5], [0.0, 1.0, 3.0])
    f = functions.gaussian(3, 5.0, 0.5, branches=[0, 2])
    g = functions.gaussian(3, 4.0, 0.4, amplitude=np.array([0.3, 1.0, -1.0]))
    h = functions.linear_combination([alpha, 1.0], [f, g])
    grid = spectral_grid(net, 60.0, 9.0)
    Vf, Vg, Vh = (transform_V(u, grid, net) for u in (f, g, h))
    for k in range(3):
        ref = alpha * Vf.components[k] + Vg.components[k]
        assert np.max(np.abs(Vh.components[k] - ref)) <= 1e-13 * max(1.0, np.max(np.abs(ref)))


def test_adjoint_identity(net3, bump3):
    grid = spectral_grid(net3, 60.0, 2 * bump3.support_radius)
    G = SpectralFunction.from_callable(
        grid, net3, lambda k, lam: (1 + 0.5j * k) * np.exp(-0.2 * (lam - 4.0) ** 2))
    Vf = transform_V(bump3, grid, net3)
    ZG = transform_Z(G, net3, support=bump3.support_radius)
    lhs = inner_sigma(G, Vf)
    rhs = inner_product_H(ZG, bump3)
    assert abs(lhs - rhs) < 1e-6 * max(1.0, abs(lhs))


def test_function_of_A_zero(net3, bump3):
    out = apply_function_of_A(lambda lam: np.zeros_like(lam), bump3, net3)
    assert np.all(out(0, np.linspace(0, 5, 5)) == 0)


def test_function_of_A_indicator_matches_projection(net3, bump3):
    a, b = 0.5, 6.0
    x_max = bump3.support_radius + 4.0
    grid = spectral_grid(net3, b, 2 * x_max, lo=a)
    via_V = apply_function_of_A(indicator(a, b), bump3, net3, grid=grid, support=x_max)
    direct = projection_E(a, b, bump3, net3, "symmetric", x_max=x_max)
    assert _rel_l2(via_V, direct, 3, np.linspace(0, x_max, 400)) < 1e-3


def test_function_of_A_identity_is_A(net3, bump3):
    # band-limit the bump with a smooth spectral window; the result decays
    # rapidly in x, so truncating it at x_max is harmless
    lo, hi, x_max = 0.5, 8.0, 40.0
    grid = spectral_grid(net3, hi, 2 * x_max, lo=lo)
    f = apply_function_of_A(functions.smooth_bump(lo, hi), bump3, net3, grid=grid, support=x_max)
    via_V = apply_function_of_A(lambda lam: lam, f, net3, grid=grid, support=x_max)
    Af = apply_A(f, net3)
    assert _rel_l2(via_V, Af, 3, np.linspace(0, 20, 400)) < 1e-3


def test_sobolev_smooth_domain_function():
    net = domain_network()
    f = functions.even_gaussian(3, 1.0)
    rep = sobolev_membership(f, 1, net)
    assert rep.finite
    assert abs(rep.norm_j - norm_H(apply_A(f, net))) / rep.norm_j < 1e-3


def test_sobolev_jump_grows(net3):
    jump = functions.gaussian(3, 0.5, 0.5, branches=[0])
    rep = sobolev_membership(jump, 1, net3)
    assert not rep.finite
    assert all(b > a for a, b in zip(rep.norms, rep.norms[1:]))


def test_sobolev_zero(net3):
    rep = sobolev_membership(AnalyticFunction.zero(3), 2, net3)
    assert rep.finite and rep.norm_j == 0.0


def test_cutoff_cap_warns(net3):
    from star_kg import choose_lambda_max, functions
    # a jump at the vertex gives a slowly decaying transform
    f = functions.indicator(3, 0, 0.0, 1.0)
    with pytest.warns(RuntimeWarning, match="cap"):
        assert choose_lambda_max(f, net3, cap=200.0) == 200.0
