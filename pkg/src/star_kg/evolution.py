"""Klein-Gordon evolution by functional calculus, energy, and tunnel-rate fits.

The solution of ``u_tt + A u = 0`` is synthesized as::

    u(t) = Z[cos(√lam t) Vu0 + sin(√lam t)/√lam Vv0]
    v(t) = Z[-√lam sin(√lam t) Vu0 + cos(√lam t) Vv0]

The three multipliers are entire in ``lam``; they are evaluated through a
complex square root, so potentials below zero need no special care.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import AmplitudeUnderflow, BandOutsideGap, NonCompactSupport, NonConformingInitialData
from .functions import smooth_bump
from .kernel import _sinc, decay_rate
from .network import AnalyticFunction, NetworkFunction, StarNetwork, check_transmission
from .quadrature import gauss_panels
from .transform import (SpectralFunction, choose_lambda_max, spectral_grid, transform_V,
                        transform_Z)


def cos_sqrt(lam, t):
    return np.cos(np.sqrt(np.asarray(lam, dtype=complex)) * t)


def sin_sqrt_over_sqrt(lam, t):
    """``sin(√lam t)/√lam`` written as ``t sinc(√lam t)``, finite at ``lam = 0``."""
    z = np.sqrt(np.asarray(lam, dtype=complex)) * t
    return t * _sinc(z)


def sqrt_sin_sqrt(lam, t):
    """``√lam sin(√lam t) = lam t sinc(√lam t)``."""
    lam = np.asarray(lam, dtype=complex)
    return lam * t * _sinc(np.sqrt(lam) * t)


@dataclass(frozen=True)
class WaveState:
    """Displacement ``u`` and velocity ``v`` at time ``t``."""

    u: NetworkFunction
    v: NetworkFunction
    t: float
    conforming: bool = True
    xi_max: float | None = None


def _is_zero(f: NetworkFunction) -> bool:
    return all(f.interval(k) is None for k in range(f.n))


class KleinGordonFlow:
    """Evolution operator bound to fixed initial data.

    ``Vu0`` and ``Vv0`` are computed once on a grid that resolves times up to
    ``t_max`` and coordinates up to ``x_out``; :meth:`state` then only
    rescales spectral components and synthesizes.

    Parameters
    ----------
    u0, v0 : NetworkFunction
        Compactly supported initial displacement and velocity.
    t_max : float
        Largest ``|t|`` that will be requested.
    x_out : float, optional
        Largest output coordinate. Defaults to the support radius plus
        ``t_max · max √c_k`` plus 2.
    lambda_max : float, optional
        Spectral cutoff; chosen from the decay of ``Vu0``, ``Vv0`` otherwise.
    transmission_tol : float
        Vertex-defect tolerance under which ``u0`` counts as conforming.
    """

    def __init__(self, u0: NetworkFunction, v0: NetworkFunction, net: StarNetwork, t_max: float,
                 x_out: float | None = None, lambda_max: float | None = None,
                 transmission_tol: float = 1e-8, cutoff_tol: float = 1e-12):
        if not (u0.compact and v0.compact):
            raise NonCompactSupport("initial data must be compactly supported")
        self.net = net
        self.u0, self.v0 = u0, v0
        self.t_max = float(abs(t_max))
        r = max(u0.support_radius, v0.support_radius)
        self.x_out = r + self.t_max * np.sqrt(net.c_arr.max()) + 2.0 if x_out is None else x_out
        d = check_transmission(u0, net)
        scale = max(1.0, float(max(np.max(np.abs(u0(k, np.zeros(1)))) for k in range(net.n))))
        self.conforming = d.ok(transmission_tol * scale)
        if not self.conforming:
            warnings.warn(f"initial displacement violates vertex conditions "
                          f"(t0 {d.t0_defect:.2e}, t1 {d.t1_defect:.2e}); energy checks skipped",
                          NonConformingInitialData, stacklevel=2)
        if lambda_max is None:
            cands = [choose_lambda_max(f, net, cutoff_tol) for f in (u0, v0) if not _is_zero(f)]
            lambda_max = max(cands, default=net.a[-1] + 10.0)
        self.grid = spectral_grid(net, lambda_max, r + self.x_out, self.t_max)
        self.Vu = transform_V(u0, self.grid, net)
        self.Vv = transform_V(v0, self.grid, net)

    def spectral_state(self, t: float) -> tuple[SpectralFunction, SpectralFunction]:
        t = float(t)
        if abs(t) > self.t_max * (1 + 1e-12):
            raise ValueError(f"|t| = {abs(t)} exceeds the prepared t_max = {self.t_max}")
        U = self.Vu.multiply(lambda lam: cos_sqrt(lam, t)) + \
            self.Vv.multiply(lambda lam: sin_sqrt_over_sqrt(lam, t))
        W = self.Vu.multiply(lambda lam: -sqrt_sin_sqrt(lam, t)) + \
            self.Vv.multiply(lambda lam: cos_sqrt(lam, t))
        return U, W

    def state(self, t: float) -> WaveState:
        U, W = self.spectral_state(t)
        xi_max = float(np.sqrt((self.grid.lambda_max - self.net.a[0]) / self.net.c_arr.min()))
        return WaveState(transform_Z(U, self.net, support=self.x_out),
                         transform_Z(W, self.net, support=self.x_out), float(t), self.conforming,
                         xi_max)

    def half_wave(self, t: float) -> NetworkFunction:
        """``Z e^{-i √lam t} Vu0``."""
        G = self.Vu.multiply(lambda lam: np.exp(-1j * np.sqrt(np.asarray(lam, dtype=complex)) * t))
        return transform_Z(G, self.net, support=self.x_out)


def evolve(u0: NetworkFunction, v0: NetworkFunction, t: float, net: StarNetwork, **kwargs) -> WaveState:
    """Solution of the Klein-Gordon equation at time ``t`` (see :class:`KleinGordonFlow`)."""
    return KleinGordonFlow(u0, v0, net, abs(t), **kwargs).state(t)


def _branch_rule(x_max, xi_max, order=16):
    panels = max(int(np.ceil(x_max * max(xi_max, 1.0) / 2.0)), int(np.ceil(x_max / 0.25)), 1)
    return gauss_panels(0.0, x_max, panels, order)


def energy(state: WaveState, net: StarNetwork, x_max: float | None = None,
           xi_max: float | None = None) -> float:
    """``‖v‖² + Σ_k (c_k ‖u_k'‖² + a_k ‖u_k‖²)`` by composite Gauss quadrature on ``[0, x_max]``.

    ``xi_max`` bounds the spatial wave numbers present, which fixes the
    panel count; it defaults to the value carried by the state, else 30.
    """
    if x_max is None:
        x_max = max(state.u.support_radius, state.v.support_radius)
    if xi_max is None:
        xi_max = state.xi_max if state.xi_max is not None else 30.0
    xs, ws = _branch_rule(x_max, xi_max)
    total = 0.0
    for k in range(net.n):
        u = state.u(k, xs)
        du = state.u(k, xs, 1)
        v = state.v(k, xs)
        total += np.sum(ws * (np.abs(v) ** 2 + net.c[k] * np.abs(du) ** 2 + net.a[k] * np.abs(u) ** 2))
    return float(total)


@dataclass(frozen=True)
class TunnelFit:
    fitted_rate: float
    predicted_rate_interval: tuple
    window: tuple
    band: tuple
    branch: int
    xs: np.ndarray
    amplitude: np.ndarray

    @property
    def relative_miss(self) -> float:
        """Relative distance of the fitted rate to the predicted interval (0 inside)."""
        lo, hi = self.predicted_rate_interval
        r = self.fitted_rate
        if r < lo:
            return (lo - r) / lo
        if r > hi:
            return (r - hi) / hi
        return 0.0


def tunnel_decay_profile(band, k: int, u0: NetworkFunction, net: StarNetwork, *, t: float = 0.5,
                         window: tuple | None = None, samples: int = 60,
                         psi=None) -> TunnelFit:
    """Fit the exponential decay of a band-limited wave on a non-propagating branch.

    ``u0`` is first restricted spectrally to ``band`` with a smooth bump,
    evolved to time ``t``, and ``log|u|`` on branch ``k`` is fitted by least
    squares over ``window``. The default window starts one unit beyond the
    support of ``u0`` on branch ``k`` and is three units long.

    Raises
    ------
    BandOutsideGap
        If the band is not inside one gap between consecutive potentials or
        branch ``k`` propagates there.
    AmplitudeUnderflow
        If the solution drops below ``1e-12`` in the fit window.
    """
    lo, hi = map(float, band)
    if not lo < hi:
        raise BandOutsideGap("band must have lo < hi")
    p = net.band_index(lo)
    if p == 0 or p >= net.n or not hi < net.a[p] or net.is_threshold(lo):
        raise BandOutsideGap(f"band ({lo}, {hi}) is not inside a gap (a_p, a_p+1)")
    if k < p:
        raise BandOutsideGap(f"branch {k} propagates on the band ({lo}, {hi})")
    psi = psi or smooth_bump(lo, hi)
    iv = u0.interval(k)
    start = (iv[1] if iv is not None else 0.0) + 1.0
    window = window or (start, start + 3.0)
    x_out = window[1]
    grid = spectral_grid(net, hi, u0.support_radius + x_out, t, lo=lo)
    G = transform_V(u0, grid, net).multiply(lambda lam: psi(lam) * cos_sqrt(lam, t))
    u = transform_Z(G, net, support=x_out)
    xs = np.linspace(window[0], window[1], samples)
    amp = np.abs(u(k, xs))
    if amp.min() < 1e-12:
        raise AmplitudeUnderflow(f"|u| falls to {amp.min():.2e} in the fit window")
    slope = np.polyfit(xs, np.log(amp), 1)[0]
    pred = (decay_rate(hi, k, net), decay_rate(lo, k, net))
    return TunnelFit(float(-slope), pred, tuple(window), (lo, hi), k, xs, amp)
