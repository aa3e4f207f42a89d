"""Vectorized pairings of network functions with generalized eigenfunctions.

These are the inner loops shared by the projection and transform code. All
spectral parameters here are real and the eigenfunctions carry the ``-`` sign.
"""
from __future__ import annotations

import numpy as np

from .kernel import eigen_branch, xi_all
from .network import NetworkFunction, StarNetwork
from .quadrature import gauss_panels

_CHUNK = 512


def branch_wavenumber_bound(lam_max: float, net: StarNetwork) -> np.ndarray:
    """``max |xi_b(lam)|`` over ``lam <= lam_max`` for each branch."""
    return np.sqrt(np.abs(lam_max - net.a_arr) / net.c_arr)


def x_rule(f: NetworkFunction, k: int, xi_max: float, panel: float = 0.25, order: int = 16,
           phase_per_panel: float = 3.0):
    """Composite Gauss rule on the support of ``f`` on branch ``k``."""
    iv = f.interval(k)
    if iv is None:
        return np.empty(0), np.empty(0)
    lo, hi = iv
    if not np.isfinite(hi):
        raise ValueError("x-quadrature needs a finite support interval")
    length = hi - lo
    panels = max(int(np.ceil(length / panel)), int(np.ceil(length * xi_max / phase_per_panel)), 1)
    return gauss_panels(lo, hi, panels, order)


def pair(f: NetworkFunction, lam: np.ndarray, comp: int, net: StarNetwork, *, conj: bool = True,
         panel: float = 0.25, order: int = 16) -> np.ndarray:
    """``∫_N f · conj(F^{-,comp}_lam) dx`` for every entry of ``lam``.

    With ``conj=False`` the eigenfunction enters without conjugation.
    """
    lam = np.asarray(lam, dtype=float)
    out = np.zeros(lam.size, dtype=complex)
    if lam.size == 0:
        return out
    bound = branch_wavenumber_bound(lam.max(), net)
    xis = xi_all(lam, net)
    for b in range(net.n):
        xs, ws = x_rule(f, b, bound[b], panel, order)
        if xs.size == 0:
            continue
        wf = ws * f(b, xs)
        for s in range(0, lam.size, _CHUNK):
            sl = slice(s, s + _CHUNK)
            E = eigen_branch(lam[sl], comp, b, xs, net, -1, 0, xis[sl])
            out[sl] += (np.conj(E) if conj else E) @ wf
    return out


def pair_all(f: NetworkFunction, lam: np.ndarray, net: StarNetwork, *, conj: bool = True,
             panel: float = 0.25, order: int = 16) -> np.ndarray:
    """:func:`pair` for every component; shape ``(n, len(lam))``."""
    return np.array([pair(f, lam, m, net, conj=conj, panel=panel, order=order)
                     for m in range(net.n)])


def synthesize(lam: np.ndarray, coeffs: np.ndarray, b: int, x, net: StarNetwork,
               deriv: int = 0, comps=None) -> np.ndarray:
    """``Σ_m Σ_i coeffs[m, i] · F^{-,m}_{lam_i}`` on branch ``b`` at ``x``.

    ``coeffs`` already contains quadrature weights and spectral weights.
    """
    lam = np.asarray(lam, dtype=float)
    x = np.asarray(x, dtype=float)
    shape = x.shape
    x = x.ravel()
    out = np.zeros(x.size, dtype=complex)
    if lam.size == 0:
        return out.reshape(shape)
    xis = xi_all(lam, net)
    comps = range(net.n) if comps is None else comps
    step = max(1, 2_000_000 // max(lam.size, 1))
    for s in range(0, x.size, step):
        xs = x[s:s + step]
        for m in comps:
            cm = coeffs[m]
            nz = cm != 0
            if not np.any(nz):
                continue
            E = eigen_branch(lam[nz], m, b, xs, net, -1, deriv, xis[nz])
            out[s:s + step] += cm[nz] @ E
    return out.reshape(shape)
