import warnings

import numpy as np
import pytest

from star_kg import AnalyticFunction, KleinGordonFlow, StarNetwork, evolve, norm_H
from star_kg import functions
from star_kg.errors import BandOutsideGap, NonConformingInitialData
from star_kg.evolution import cos_sqrt, sin_sqrt_over_sqrt, sqrt_sin_sqrt, tunnel_decay_profile

ZERO3 = AnalyticFunction.zero(3)


def test_multipliers_at_zero_and_negative():
    assert sin_sqrt_over_sqrt(0.0, 2.5) == 2.5
    assert cos_sqrt(0.0, 3.0) == 1.0
    assert sqrt_sin_sqrt(0.0, 3.0) == 0.0
    # below zero the multipliers turn hyperbolic and stay real
    assert abs(cos_sqrt(-4.0, 1.0) - np.cosh(2.0)) < 1e-13
    assert abs(sin_sqrt_over_sqrt(-4.0, 1.0) - np.sinh(2.0) / 2.0) < 1e-13
    assert abs(sin_sqrt_over_sqrt(1e-12, 2.0) - 2.0) < 1e-10


def test_initial_time_round_trip(net3, bump3):
    st = evolve(bump3, ZERO3, 0.0, net3)
    x = np.linspace(0, bump3.support_radius, 400)
    for k in range(3):
        assert np.max(np.abs(st.u(k, x) - bump3(k, x))) < 1e-3


def test_dalembert_splitting(line):
    u0 = functions.gaussian(2, 8.0, 0.6, branches=[0])
    st = evolve(u0, AnalyticFunction.zero(2), 5.0, line)
    g = lambda s: np.exp(-0.5 * ((s - 8.0) / 0.6) ** 2)
    y = np.linspace(0, 20, 801)
    assert np.max(np.abs(st.u(0, y) - 0.5 * (g(y - 5) + g(y + 5)))) < 1e-2
    assert np.max(np.abs(st.u(1, y) - 0.5 * (g(-y - 5) + g(-y + 5)))) < 1e-2


def test_time_symmetry(net3, bump3):
    t = 1.5
    flow = KleinGordonFlow(bump3, ZERO3, net3, t)
    fwd = flow.state(t)
    back = evolve(fwd.u, fwd.v, -t, net3, x_out=bump3.support_radius + 1.0,
                  lambda_max=flow.grid.lambda_max)
    x = np.linspace(0, bump3.support_radius, 300)
    for k in range(3):
        assert np.max(np.abs(back.u(k, x) - bump3(k, x))) < 2e-3


def test_finite_propagation():
    net = StarNetwork([1.0, 4.0, 0.25], [0.0, 0.5, 1.0])
    u0 = functions.gaussian(3, 5.0, 0.4, amplitude=np.array([1.0, 0.5, -0.5]))
    r = u0.support_radius
    t = 3.0
    speed = np.sqrt(net.c_arr.max())
    flow = KleinGordonFlow(u0, ZERO3, net, t, x_out=r + t * speed + 6.0)
    st = flow.state(t)
    x = np.linspace(r + t * speed + 1.0, flow.x_out, 200)
    for k in range(3):
        assert np.max(np.abs(st.u(k, x))) < 1e-6


def test_half_wave_unitarity(net3, bump3):
    flow = KleinGordonFlow(bump3, ZERO3, net3, 4.0)
    n0 = norm_H(bump3)
    for t in (1.0, 2.5, 4.0):
        assert abs(norm_H(flow.half_wave(t)) - n0) < 1e-3


def test_nonconforming_warning(net3):
    jump = functions.gaussian(3, 0.5, 0.5, branches=[0])
    with pytest.warns(NonConformingInitialData):
        flow = KleinGordonFlow(jump, ZERO3, net3, 1.0, lambda_max=60.0)
    assert not flow.conforming
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert KleinGordonFlow(functions.gaussian(3, 5.0, 0.5), ZERO3, net3, 1.0).conforming


def test_time_beyond_prepared_range(net3, bump3):
    flow = KleinGordonFlow(bump3, ZERO3, net3, 1.0)
    with pytest.raises(ValueError):
        flow.state(2.0)


def test_tunnel_errors():
    net = StarNetwork([1, 1, 1], [0, 4, 16])
    u0 = functions.gaussian(3, 1.5, 0.4, branches=[0])
    with pytest.raises(BandOutsideGap):
        tunnel_decay_profile((17.0, 19.0), 2, u0, net)
    with pytest.raises(BandOutsideGap):
        tunnel_decay_profile((1.0, 3.0), 0, u0, net)
    with pytest.raises(BandOutsideGap):
        tunnel_decay_profile((3.0, 5.0), 2, u0, net)


def test_tunnel_rate_second_gap():
    # band (5, 7) lies between a_2 = 4 and a_3 = 16: only branch index 2 decays
    net = StarNetwork([1, 1, 1], [0, 4, 16])
    u0 = functions.gaussian(3, 1.5, 0.4, branches=[0])
    fit = tunnel_decay_profile((5.0, 7.0), 2, u0, net)
    assert fit.relative_miss <= 0.05
    assert fit.predicted_rate_interval == (3.0, np.sqrt(11.0))
