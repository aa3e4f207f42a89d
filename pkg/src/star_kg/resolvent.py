"""Resolvent kernel, quadrature application of the resolvent, and boundary-value checks."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NonCompactSupport, PreconditionError, SpectrumPoint, WronskianZero
from .kernel import (bound_N_gamma, eigen_branch, eigen_pointwise, kernel_sign,
                     wronskian_w, xi_all)
from .network import AnalyticFunction, GridFunction, NetworkFunction, NetworkPoint, StarNetwork
from .quadrature import gauss_legendre, gauss_panels


@dataclass(frozen=True)
class KernelQuery:
    x: NetworkPoint
    x_prime: NetworkPoint
    lam: complex


def _wronskian_checked(lam, sign, net):
    w = wronskian_w(lam, sign, net)
    if w == 0:
        raise WronskianZero(f"w({lam}) = 0")
    return w


def kernel_values(lam: complex, jb, x, kb, xp, net: StarNetwork,
                  partner_shift: int = 1) -> np.ndarray:
    """Vectorized resolvent kernel for pointwise queries.

    ``x`` lies on branch ``jb`` and ``xp`` on branch ``kb``; all four arrays
    broadcast together. The partner branch of ``jb`` is
    ``(jb + partner_shift) mod n``; any shift that is not a multiple of ``n``
    gives the same kernel.
    """
    lam = complex(lam)
    n = net.n
    if partner_shift % n == 0:
        raise ValueError("partner branch must differ from the distinguished branch")
    sign = kernel_sign(lam)
    w = _wronskian_checked(lam, sign, net)
    jb, x, kb, xp = np.broadcast_arrays(np.asarray(jb), np.asarray(x, dtype=float),
                                        np.asarray(kb), np.asarray(xp, dtype=float))
    partner = (jb + partner_shift) % n
    ahead = (kb == jb) & (xp > x)
    # x' beyond x on the same branch: e1(x) e2(x'); otherwise e2(x) F^j(x')
    first = np.where(ahead, eigen_pointwise(lam, jb, jb, x, net, sign),
                     eigen_pointwise(lam, partner, jb, x, net, sign))
    second = np.where(ahead, eigen_pointwise(lam, partner, jb, xp, net, sign),
                      eigen_pointwise(lam, jb, kb, xp, net, sign))
    return first * second / w


def kernel_K(q: KernelQuery, net: StarNetwork, partner_shift: int = 1) -> complex:
    """Resolvent kernel ``K(x, x', lam)`` with the sign chosen by ``Im lam``."""
    return complex(kernel_values(q.lam, q.x.branch, q.x.x, q.x_prime.branch, q.x_prime.x,
                                 net, partner_shift))


def diagonal_branches(lam: complex, j: int, x, net: StarNetwork) -> tuple[np.ndarray, np.ndarray]:
    """Both case formulas of the kernel evaluated on the diagonal ``x' = x`` of branch ``j``."""
    sign = kernel_sign(lam)
    w = _wronskian_checked(lam, sign, net)
    x = np.asarray(x, dtype=float)
    partner = (j + 1) % net.n
    e1 = eigen_pointwise(lam, j, j, x, net, sign)
    e2 = eigen_pointwise(lam, partner, j, x, net, sign)
    return e1 * e2 / w, e2 * e1 / w


class _ResolventOutput:
    """Lazy evaluation of ``R(lam) f`` on any branch.

    For ``x`` on branch ``j`` with ``e1 = F^j|_{N_j}`` and ``e2 = F^{partner}|_{N_j}``::

        w u(x) = e1(x) ∫_x^∞ e2 f_j + e2(x) (∫_0^x e1 f_j + Σ_{k≠j} ∫ F^j_k f_k)
    """

    def __init__(self, f: NetworkFunction, lam: complex, net: StarNetwork, order: int,
                 panel: float, partner_shift: int):
        self.f = f
        self.lam = complex(lam)
        self.net = net
        self.order = order
        self.sign = kernel_sign(self.lam)
        self.w = _wronskian_checked(self.lam, self.sign, net)
        self.xis = xi_all(np.array([self.lam]), net)
        self.partner_shift = partner_shift
        n = net.n
        lam_arr = np.array([self.lam])
        # off-branch contributions Σ_{k≠j} ∫ F^j_k f_k; F^j_k does not depend on j for k≠j
        off = np.zeros(n, dtype=complex)
        self.panels = []
        for k in range(n):
            iv = f.interval(k)
            if iv is None:
                self.panels.append(None)
                continue
            lo, hi = iv
            count = int(np.ceil((hi - lo) * max(abs(self.xis[0, k]), 1.0) / min(panel, 1.0)))
            edges = np.linspace(lo, hi, max(count, 1) + 1)
            xs, ws = gauss_panels(lo, hi, max(count, 1), order)
            fx = f(k, xs)
            other = (k + 1) % n
            off[k] = np.sum(ws * fx * eigen_branch(lam_arr, other, k, xs, net, self.sign, 0,
                                                   self.xis)[0])
            j_part = (k + partner_shift) % n
            e1 = eigen_branch(lam_arr, k, k, xs, net, self.sign, 0, self.xis)[0]
            e2 = eigen_branch(lam_arr, j_part, k, xs, net, self.sign, 0, self.xis)[0]
            s1 = (ws * fx * e1).reshape(-1, order).sum(axis=1)
            s2 = (ws * fx * e2).reshape(-1, order).sum(axis=1)
            pre1 = np.concatenate([[0.0], np.cumsum(s1)])
            suf2 = np.concatenate([np.cumsum(s2[::-1])[::-1], [0.0]])
            self.panels.append((edges, pre1, suf2))
        self.off_total = off.sum()
        self.off = off

    def _pieces(self, j, x):
        """Return e1, e2 and their derivatives plus I1 (with constant), I2."""
        net, lam_arr = self.net, np.array([self.lam])
        partner = (j + self.partner_shift) % net.n
        e = [eigen_branch(lam_arr, j, j, x, net, self.sign, d, self.xis)[0] for d in range(3)]
        p = [eigen_branch(lam_arr, partner, j, x, net, self.sign, d, self.xis)[0] for d in range(3)]
        const = self.off_total - self.off[j]
        I1 = np.full(x.shape, const, dtype=complex)
        I2 = np.zeros(x.shape, dtype=complex)
        info = self.panels[j]
        if info is not None:
            edges, pre1, suf2 = info
            t, wt = gauss_legendre(self.order)
            xc = np.clip(x, edges[0], edges[-1])
            idx = np.clip(np.searchsorted(edges, xc, side="right") - 1, 0, edges.size - 2)
            left, right = edges[idx], edges[idx + 1]
            # partial panel [left, xc] for I1 and [xc, right] for I2
            a_nodes = left[:, None] + (xc - left)[:, None] * t[None, :]
            b_nodes = xc[:, None] + (right - xc)[:, None] * t[None, :]
            fa = self.f(j, a_nodes.ravel()).reshape(a_nodes.shape)
            fb = self.f(j, b_nodes.ravel()).reshape(b_nodes.shape)
            e1a = eigen_branch(lam_arr, j, j, a_nodes.ravel(), net, self.sign, 0,
                               self.xis)[0].reshape(a_nodes.shape)
            e2b = eigen_branch(lam_arr, partner, j, b_nodes.ravel(), net, self.sign, 0,
                               self.xis)[0].reshape(b_nodes.shape)
            I1 = I1 + pre1[idx] + (fa * e1a) @ wt * (xc - left)
            I2 = suf2[idx + 1] + (fb * e2b) @ wt * (right - xc)
        return e, p, I1, I2

    def evaluate(self, j, x, deriv=0):
        x = np.asarray(x, dtype=float)
        shape = x.shape
        x = x.ravel()
        out = np.empty(x.shape, dtype=complex)
        for s in range(0, x.size, 4096):
            xs = x[s:s + 4096]
            e, p, I1, I2 = self._pieces(j, xs)
            val = e[deriv] * I2 + p[deriv] * I1
            if deriv == 2:
                # jump term from differentiating the variable limits twice
                val = val + (e[0] * p[1] - e[1] * p[0]) * self.f(j, xs)
            out[s:s + 4096] = val / self.w
        return out.reshape(shape)


def apply_resolvent(f: NetworkFunction, lam: complex, net: StarNetwork, *, order: int = 16,
                    panel: float = 0.25, partner_shift: int = 1, grid=None):
    """``(R(lam) f)(x) = ∫_N K(x, x', lam) f(x') dx'`` by composite Gauss quadrature.

    Parameters
    ----------
    f : NetworkFunction
        Compactly supported right-hand side.
    lam : complex
        Point of the resolvent set. Real values ``>= a_1`` are rejected.
    panel : float
        Maximal panel length of the x-quadrature (shrunk further for fast
        oscillation).
    grid : (h, L), optional
        Sample the result on a uniform grid and return a :class:`GridFunction`.

    Returns
    -------
    AnalyticFunction
        Lazy rules for the value and its first two derivatives (analytic in
        the kernel, so ``apply_A`` can be applied to the output).
    """
    lam = complex(lam)
    if lam.imag == 0.0 and lam.real >= net.a[0]:
        raise SpectrumPoint(f"lambda = {lam.real} lies in the spectrum [a_1, inf)")
    if not f.compact:
        raise NonCompactSupport("apply_resolvent needs a compactly supported right-hand side")
    if all(f.interval(k) is None for k in range(net.n)):
        out = AnalyticFunction.zero(net.n)
    else:
        ev = _ResolventOutput(f, lam, net, order, panel, partner_shift)
        mk = lambda j, d: (lambda x: ev.evaluate(j, x, d))
        out = AnalyticFunction([mk(j, 0) for j in range(net.n)], [mk(j, 1) for j in range(net.n)],
                               [mk(j, 2) for j in range(net.n)], decaying=True)
    if grid is not None:
        h, L = grid
        return GridFunction.sample(out, h, L)
    return out


@dataclass
class AbsorptionReport:
    """Result of a limiting-absorption sweep.

    ``defects[q, e]`` is ``|K(lam - i eps_e) - K(lam)|`` for query ``q``.
    """

    lam: float
    eps: np.ndarray
    defects: np.ndarray
    envelope_ratio: np.ndarray
    monotone: bool
    final_ok: bool
    envelope_ok: bool

    @property
    def passed(self) -> bool:
        return self.monotone and self.final_ok and self.envelope_ok

    @property
    def max_final_defect(self) -> float:
        return float(self.defects[:, -1].max()) if self.defects.size else 0.0


def check_limiting_absorption(lam: float, eps_sequence: Sequence[float], sample, net: StarNetwork,
                              final_tol: float = 1e-8, slack: float = 1e-12) -> AbsorptionReport:
    """Approach the real axis from below and compare with the boundary value.

    ``sample`` holds point pairs, either :class:`KernelQuery` objects (their
    spectral parameter is ignored) or ``(x, x_prime)`` tuples of
    :class:`NetworkPoint`. Monotone decrease is checked up to ``slack``;
    the envelope uses ``delta = max(eps_sequence)``.
    """
    lam = float(lam)
    if lam < net.a[0]:
        raise PreconditionError(f"lambda = {lam} is below a_1 = {net.a[0]}")
    eps = np.asarray(eps_sequence, dtype=float)
    if eps.size == 0 or np.any(eps <= 0) or np.any(np.diff(eps) >= 0):
        raise PreconditionError("eps_sequence must be positive and strictly decreasing")
    pairs = [(q.x, q.x_prime) if isinstance(q, KernelQuery) else tuple(q) for q in sample]
    jb = np.array([p[0].branch for p in pairs])
    x = np.array([p[0].x for p in pairs])
    kb = np.array([p[1].branch for p in pairs])
    xp = np.array([p[1].x for p in pairs])
    env = bound_N_gamma(lam, float(eps.max()), net)
    limit = kernel_values(lam, jb, x, kb, xp, net)
    bound = env(x, xp)
    defects = np.empty((len(pairs), eps.size))
    ratio = np.empty((len(pairs), eps.size + 1))
    ratio[:, -1] = np.abs(limit) / bound
    for e, ep in enumerate(eps):
        val = kernel_values(lam - 1j * ep, jb, x, kb, xp, net)
        defects[:, e] = np.abs(val - limit)
        ratio[:, e] = np.abs(val) / bound
    monotone = bool(np.all(np.diff(defects, axis=1) <= slack))
    final_ok = bool(np.all(defects[:, -1] < final_tol))
    envelope_ok = bool(np.all(ratio <= 1.0))
    return AbsorptionReport(lam, eps, defects, ratio, monotone, final_ok, envelope_ok)
