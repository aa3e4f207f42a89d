"""Fourier-type transform pair on the star, weighted spectral norms and functional calculus.

``V`` maps a network function to ``n`` spectral components,
``(Vf)_k(lam) = ∫_N f conj(F^{-,k}_lam)`` for ``lam > a_k``. ``Z`` maps spectral
components back, ``Z(G)(x) = Σ_k ∫ sigma_k G_k F^{-,k}_lam(x) dlam``. Both
are realized on a shared λ-quadrature over ``(a_1, lambda_max)`` that is split
at every threshold; component ``k`` uses only the nodes above ``a_k``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import warnings

import numpy as np

from .errors import NonCompactSupport
from .measure import sigma
from .network import AnalyticFunction, GridFunction, NetworkFunction, StarNetwork
from .quadrature import threshold_rule
from .spectral_core import pair, synthesize


def phase_rate(net: StarNetwork, x_extent: float, t: float = 0.0) -> float:
    """Phase per unit ``sqrt(Δlam)`` for integrands reaching out to ``x_extent`` at time ``t``."""
    return float(x_extent / np.sqrt(net.c_arr.min()) + abs(t) + 1.0)


@dataclass(frozen=True)
class SpectralGrid:
    """Shared λ-quadrature on ``(lo, lambda_max)``.

    ``x_extent`` records the largest coordinate the grid resolves when
    synthesizing functions; ``t_extent`` the largest time shift.
    """

    nodes: np.ndarray
    weights: np.ndarray
    lambda_max: float
    x_extent: float
    t_extent: float = 0.0
    lo: float = field(default=-np.inf)

    def mask(self, k: int, net: StarNetwork) -> np.ndarray:
        return self.nodes > net.a[k]

    def component(self, k: int, net: StarNetwork):
        m = self.mask(k, net)
        return self.nodes[m], self.weights[m]


def spectral_grid(net: StarNetwork, lambda_max: float, x_extent: float, t_extent: float = 0.0,
                  *, lo: float | None = None, order: int = 20) -> SpectralGrid:
    """Quadrature over ``(lo, lambda_max)`` with ``lo = a_1`` by default."""
    lo = net.a[0] if lo is None else max(float(lo), net.a[0])
    rate = phase_rate(net, x_extent, t_extent)
    nodes, weights = threshold_rule(lo, float(lambda_max), net.a, rate, order)
    return SpectralGrid(nodes, weights, float(lambda_max), float(x_extent), float(t_extent), lo)


@dataclass(frozen=True)
class SpectralFunction:
    """``n`` components sampled on a :class:`SpectralGrid`.

    ``components[k]`` holds values at ``grid.nodes[grid.nodes > a_k]``; values
    below the threshold are never stored.
    """

    grid: SpectralGrid
    components: tuple
    net: StarNetwork

    def nodes(self, k: int) -> np.ndarray:
        return self.grid.component(k, self.net)[0]

    def full(self) -> np.ndarray:
        """Components zero-padded onto the whole grid, shape ``(n, nodes)``."""
        out = np.zeros((self.net.n, self.grid.nodes.size), dtype=complex)
        for k, comp in enumerate(self.components):
            out[k, self.grid.mask(k, self.net)] = comp
        return out

    def multiply(self, psi: Callable) -> "SpectralFunction":
        """Pointwise product with a function of ``lam``."""
        comps = tuple(np.asarray(psi(self.nodes(k)), dtype=complex) * c
                      for k, c in enumerate(self.components))
        return SpectralFunction(self.grid, comps, self.net)

    def __add__(self, other: "SpectralFunction") -> "SpectralFunction":
        if other.grid is not self.grid:
            raise ValueError("spectral functions live on different grids")
        return SpectralFunction(self.grid, tuple(a + b for a, b in
                                                 zip(self.components, other.components)), self.net)

    def scale(self, alpha: complex) -> "SpectralFunction":
        return SpectralFunction(self.grid, tuple(alpha * c for c in self.components), self.net)

    @classmethod
    def from_callable(cls, grid: SpectralGrid, net: StarNetwork, fn: Callable[[int, np.ndarray], np.ndarray]):
        comps = tuple(np.asarray(fn(k, grid.component(k, net)[0]), dtype=complex)
                      for k in range(net.n))
        return cls(grid, comps, net)


def inner_sigma(F: SpectralFunction, G: SpectralFunction, net: StarNetwork | None = None) -> complex:
    """``Σ_k ∫ sigma_k F_k conj(G_k)``."""
    net = net or F.net
    total = 0j
    for k in range(net.n):
        lam, w = F.grid.component(k, net)
        total += np.sum(w * sigma(lam, k, net) * F.components[k] * np.conj(G.components[k]))
    return complex(total)


def norm_sigma(F: SpectralFunction, net: StarNetwork | None = None) -> float:
    """Weighted norm ``(Σ_k ∫ sigma_k |F_k|²)^{1/2}``."""
    return float(np.sqrt(max(inner_sigma(F, F, net).real, 0.0)))


def transform_V(f: NetworkFunction, grid: SpectralGrid, net: StarNetwork, *,
                panel: float = 0.25, order: int = 16) -> SpectralFunction:
    """Sample ``Vf`` on the grid by x-quadrature over the support of ``f``.

    Raises
    ------
    NonCompactSupport
    """
    if not f.compact:
        raise NonCompactSupport("transform_V needs a compactly supported function")
    comps = tuple(pair(f, grid.component(k, net)[0], k, net, panel=panel, order=order)
                  for k in range(net.n))
    return SpectralFunction(grid, comps, net)


class _Synthesis:
    def __init__(self, G: SpectralFunction, net: StarNetwork):
        self.lam = G.grid.nodes
        coeffs = G.full()
        for k in range(net.n):
            coeffs[k] *= G.grid.weights * sigma(self.lam, k, net)
        self.coeffs = coeffs
        self.net = net

    def rule(self, b, deriv):
        return lambda x: synthesize(self.lam, self.coeffs, b, x, self.net, deriv)


def transform_Z(G: SpectralFunction, net: StarNetwork, *, support: float | None = None,
                grid=None) -> NetworkFunction:
    """Synthesize ``Z(G)``.

    Parameters
    ----------
    support : float, optional
        Radius used as the support of the returned function (for inner
        products). Defaults to ``G.grid.x_extent``; the λ-grid is only
        guaranteed to resolve coordinates up to that value.
    grid : (h, L), optional
        Return samples on a uniform grid instead of lazy rules.
    """
    syn = _Synthesis(G, net)
    radius = G.grid.x_extent if support is None else support
    out = AnalyticFunction([syn.rule(b, 0) for b in range(net.n)],
                           [syn.rule(b, 1) for b in range(net.n)],
                           [syn.rule(b, 2) for b in range(net.n)], support=radius)
    if grid is not None:
        h, L = grid
        return GridFunction.sample(out, h, L)
    return out


def choose_lambda_max(f: NetworkFunction, net: StarNetwork, tol: float = 1e-12,
                      start: float | None = None, cap: float = 1e4) -> float:
    """Smallest doubled cutoff whose next window carries a negligible share of ``|Vf|²_sigma``.

    Starting from ``a_n + start`` the window ``(a_1, L)`` is compared with
    ``(L, 2L - a_1)``; the cutoff doubles until the second holds less than
    ``tol`` of the total. Returns ``cap`` with a ``RuntimeWarning`` if that
    never happens.
    """
    r = f.support_radius
    a1 = net.a[0]
    top = net.a[-1] + (start if start is not None else 16.0 * net.c_arr.max())
    mass = _window_mass(f, net, a1, top, r)
    while top < cap:
        nxt = a1 + 2.0 * (top - a1)
        tail = _window_mass(f, net, top, nxt, r)
        if tail <= tol * (mass + tail):
            return float(top)
        mass += tail
        top = nxt
    warnings.warn(f"spectral tail still above {tol:g} at the cutoff cap {cap:g}", RuntimeWarning,
                  stacklevel=2)
    return float(cap)


def _window_mass(f, net, lo, hi, r):
    g = spectral_grid(net, hi, r, lo=lo)
    Vf = transform_V(f, g, net)
    return norm_sigma(Vf, net) ** 2


def auto_grid(f: NetworkFunction, net: StarNetwork, x_out: float | None = None, t: float = 0.0,
              tol: float = 1e-12, lambda_max: float | None = None) -> SpectralGrid:
    """Grid whose cutoff comes from :func:`choose_lambda_max` and whose reach covers ``x_out``."""
    lm = choose_lambda_max(f, net, tol) if lambda_max is None else lambda_max
    x_out = f.support_radius if x_out is None else x_out
    return spectral_grid(net, lm, f.support_radius + x_out, t)


def apply_function_of_A(psi: Callable, f: NetworkFunction, net: StarNetwork, *,
                        grid: SpectralGrid | None = None, support: float | None = None) -> NetworkFunction:
    """``Z(psi · Vf)`` for a bounded real rule ``psi`` on the spectral window."""
    grid = grid or auto_grid(f, net)
    return transform_Z(transform_V(f, grid, net).multiply(psi), net, support=support)


def indicator(a: float, b: float) -> Callable:
    return lambda lam: ((lam > a) & (lam < b)).astype(float)


@dataclass(frozen=True)
class SobolevReport:
    norm_j: float
    finite: bool
    cutoffs: tuple
    norms: tuple
    tail_estimate: float


def sobolev_membership(f: NetworkFunction, j: int, net: StarNetwork, *, start: float | None = None,
                       levels: int = 4, rtol: float = 1e-3) -> SobolevReport:
    """Estimate ``|lam^j Vf|_sigma`` and decide whether it converges as the cutoff grows.

    The window ``(a_1, a_n + start)`` is extended by doubling ``levels`` times.
    The squared norm added by each extension is recorded; the sequence is
    judged convergent when the last increment is below ``rtol²`` of the total
    or the increments shrink at least geometrically with ratio below 1/2. The
    reported norm includes a geometric tail estimate.
    """
    if not f.compact:
        raise NonCompactSupport("sobolev_membership needs a compactly supported function")
    if all(f.interval(k) is None for k in range(net.n)):
        return SobolevReport(0.0, True, (), (), 0.0)
    r = f.support_radius
    a1 = net.a[0]
    span = start if start is not None else 25.0 * net.c_arr.max()
    edges = [a1, net.a[-1] + span]
    for _ in range(levels):
        edges.append(a1 + 2.0 * (edges[-1] - a1))
    pieces = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        g = spectral_grid(net, hi, r, lo=lo)
        Vf = transform_V(f, g, net).multiply(lambda lam: lam ** j)
        pieces.append(norm_sigma(Vf, net) ** 2)
    cum = np.cumsum(pieces)
    inc = np.asarray(pieces[1:])
    total = cum[-1]
    tail = 0.0
    finite = bool(inc[-1] <= rtol**2 * total)
    if not finite and inc[-2] > 0:
        ratio = inc[-1] / inc[-2]
        if ratio < 0.5:
            finite = True
            tail = inc[-1] * ratio / (1.0 - ratio)
    return SobolevReport(float(np.sqrt(total + tail)), finite, tuple(edges[1:]),
                         tuple(np.sqrt(cum)), float(tail))
