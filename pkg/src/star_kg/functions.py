"""Ready-made network functions with exact derivative rules."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .network import AnalyticFunction

# exp(-x²/2) < 1e-17 beyond 9 widths
_CUT = 9.0


def gaussian(n: int, center: float, width: float, branches: Sequence[int] | None = None,
             amplitude=1.0, wavenumber: float = 0.0) -> AnalyticFunction:
    """``A exp(-(x-x0)²/(2 w²) + i k x)`` on the chosen branches.

    The support is clipped to ``[x0 - 9w, x0 + 9w] ∩ [0, inf)``. Centers
    closer than about ``9w`` to the vertex leave a jump there.
    """
    branches = range(n) if branches is None else branches
    amps = np.broadcast_to(np.asarray(amplitude, dtype=complex), (n,))
    lo, hi = max(0.0, center - _CUT * width), center + _CUT * width
    rules, d1, d2, sup = [], [], [], []
    for b in range(n):
        if b not in branches:
            rules.append(None), d1.append(None), d2.append(None), sup.append(None)
            continue
        A = amps[b]

        def g(x, A=A):
            return A * np.exp(-0.5 * ((x - center) / width) ** 2 + 1j * wavenumber * x)

        def g1(x, g=g):
            return g(x) * (-(x - center) / width**2 + 1j * wavenumber)

        def g2(x, g=g):
            u = -(x - center) / width**2 + 1j * wavenumber
            return g(x) * (u * u - 1.0 / width**2)

        rules.append(g), d1.append(g1), d2.append(g2), sup.append((lo, hi))
    return AnalyticFunction(rules, d1, d2, support=sup)


def even_gaussian(n: int, width: float = 1.0, amplitude: float = 1.0) -> AnalyticFunction:
    """``A exp(-x²/w²)`` on every branch: continuous at the vertex with zero slope."""
    return gaussian(n, 0.0, width / np.sqrt(2.0), amplitude=amplitude)


def polynomial_gaussian(n: int, power: int = 4, width: float = 1.0, branches=None,
                        amplitude=1.0) -> AnalyticFunction:
    """``A (x/w)^power exp(-x²/(2w²))``: vanishes to order ``power`` at the vertex."""
    branches = range(n) if branches is None else branches
    amps = np.broadcast_to(np.asarray(amplitude, dtype=complex), (n,))
    m = power
    hi = width * (np.sqrt(2 * m) + _CUT)
    rules, d1, d2, sup = [], [], [], []
    for b in range(n):
        if b not in branches:
            rules.append(None), d1.append(None), d2.append(None), sup.append(None)
            continue
        A = amps[b]

        def g(x, A=A):
            s = x / width
            return A * s**m * np.exp(-0.5 * s * s)

        def g1(x, A=A):
            s = x / width
            return A * (m * s ** (m - 1) - s ** (m + 1)) * np.exp(-0.5 * s * s) / width

        def g2(x, A=A):
            s = x / width
            p = m * (m - 1) * s ** (m - 2) - (2 * m + 1) * s**m + s ** (m + 2)
            return A * p * np.exp(-0.5 * s * s) / width**2

        rules.append(g), d1.append(g1), d2.append(g2), sup.append((0.0, hi))
    return AnalyticFunction(rules, d1, d2, support=sup)


def indicator(n: int, branch: int, lo: float = 0.0, hi: float = 1.0) -> AnalyticFunction:
    rules = [None] * n
    rules[branch] = lambda x: np.ones_like(x, dtype=complex)
    sup = [None] * n
    sup[branch] = (lo, hi)
    return AnalyticFunction(rules, support=sup)


def smooth_bump(lo: float, hi: float):
    """``exp(1 - 1/(1 - s²))`` on ``(lo, hi)`` with ``s`` the centred, rescaled variable; zero outside."""
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)

    def psi(lam):
        s = (np.asarray(lam, dtype=float) - mid) / half
        out = np.zeros_like(s)
        inside = np.abs(s) < 1.0
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
        return out

    return psi


def linear_combination(coeffs, funcs) -> AnalyticFunction:
    """``Σ c_i f_i`` for analytic functions on the same network."""
    n = funcs[0].n
    rules, d1, d2, sup = [], [], [], []
    for b in range(n):
        ivs = [f.interval(b) for f in funcs if f.interval(b) is not None]
        if not ivs:
            rules.append(None), d1.append(None), d2.append(None), sup.append(None)
            continue
        sup.append((min(i[0] for i in ivs), max(i[1] for i in ivs)))

        def make(d, b=b):
            return lambda x: sum(c * f(b, x, d) for c, f in zip(coeffs, funcs))
        rules.append(make(0))
        has1 = all(f.d1 is not None for f in funcs)
        has2 = all(f.d2 is not None for f in funcs)
        d1.append(make(1) if has1 else None)
        d2.append(make(2) if has2 else None)
    return AnalyticFunction(rules, d1, d2, support=sup)
