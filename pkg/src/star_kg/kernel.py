"""Branch-cut square root, wave numbers, Wronskian and generalized eigenfunctions.

Conventions
-----------
``conv_sqrt`` takes ``arg z`` in ``[-pi, pi)``, so ``sqrt(-r) = -i sqrt(r)``.
The wave number on branch ``k`` is ``xi_k = conv_sqrt((lam - a_k)/c_k)``.

The generalized eigenfunction with distinguished branch ``j`` and sign ``±``
is ``cos(xi_j x) ± i s_j sin(xi_j x)`` on branch ``j`` and ``exp(±i xi_k x)``
elsewhere, with ``s_j = -Σ_{l≠j} c_l xi_l / (c_j xi_j)`` so that the weighted
flux at the vertex vanishes. On branch ``j`` we evaluate the equivalent form
``cos(xi_j x) ∓ i g_j x sinc(xi_j x)`` with ``g_j = Σ_{l≠j} c_l xi_l / c_j``,
which stays finite as ``xi_j -> 0``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ThresholdSingularity
from .network import AnalyticFunction, NetworkPoint, StarNetwork


def conv_sqrt(z):
    """Square root with ``arg`` in ``[-pi/2, pi/2)``.

    Agrees with the principal root except on the negative real axis, where it
    returns ``-i sqrt(|z|)``.
    """
    z = np.asarray(z, dtype=complex)
    r = np.sqrt(z)
    neg = (z.imag == 0.0) & (z.real < 0.0)
    if np.any(neg):
        r = np.where(neg, -1j * np.sqrt(np.abs(z.real)), r)
    return r if r.ndim else complex(r)


def xi_all(lam, net: StarNetwork) -> np.ndarray:
    """Wave numbers of all branches, shape ``lam.shape + (n,)``."""
    lam = np.asarray(lam, dtype=complex)
    return np.asarray(conv_sqrt((lam[..., None] - net.a_arr) / net.c_arr))


def xi(lam, k: int, net: StarNetwork):
    """Wave number ``xi_k(lam)`` on branch ``k``."""
    return conv_sqrt((np.asarray(lam, dtype=complex) - net.a[k]) / net.c[k])


def decay_rate(lam: float, k: int, net: StarNetwork) -> float:
    """``i xi_k(lam) = sqrt((a_k - lam)/c_k)`` for real ``lam < a_k``."""
    return float(np.sqrt((net.a[k] - lam) / net.c[k]))


def _check_threshold(lam, j, net):
    lam = np.asarray(lam, dtype=complex)
    if np.any((lam.imag == 0.0) & (lam.real == net.a[j])):
        raise ThresholdSingularity(f"lambda equals the potential a_{j} = {net.a[j]}")


def s_coeff(lam, k: int, net: StarNetwork):
    """``s_k = -Σ_{l≠k} c_l xi_l / (c_k xi_k)``.

    Raises
    ------
    ThresholdSingularity
        At ``lam = a_k``.
    """
    _check_threshold(lam, k, net)
    x = xi_all(lam, net)
    cx = x * net.c_arr
    out = -(cx.sum(axis=-1) - cx[..., k]) / cx[..., k]
    return out if np.ndim(out) else complex(out)


def wronskian_w(lam, sign: int, net: StarNetwork):
    """``w = ±i Σ_j c_j xi_j(lam)``."""
    w = sign * 1j * (xi_all(lam, net) * net.c_arr).sum(axis=-1)
    return w if np.ndim(w) else complex(w)


def kernel_sign(lam) -> int:
    """Sign used by the resolvent kernel: ``+1`` iff ``Im lam > 0``."""
    return 1 if np.imag(lam) > 0 else -1


def _sinc(z):
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) < 1e-3
    zs = z[small] ** 2
    out[small] = 1.0 - zs / 6.0 * (1.0 - zs / 20.0 * (1.0 - zs / 42.0))
    zl = z[~small]
    out[~small] = np.sin(zl) / zl
    return out


def eigen_branch(lam, j: int, b: int, x, net: StarNetwork, sign: int = -1,
                 deriv: int = 0, xis: np.ndarray | None = None) -> np.ndarray:
    """Branch-``b`` component of ``F^{sign, j}`` and its x-derivatives.

    Parameters
    ----------
    lam : array_like, shape (L,)
    x : array_like, shape (X,)
    deriv : {0, 1, 2}
    xis : ndarray, optional
        Precomputed ``xi_all(lam, net)``.

    Returns
    -------
    ndarray, shape (L, X)
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if xis is None:
        xis = xi_all(lam, net)
    xb = xis[:, b][:, None]
    z = xb * x[None, :]
    if b != j:
        e = np.exp(sign * 1j * z)
        if deriv == 0:
            return e
        if deriv == 1:
            return sign * 1j * xb * e
        return -(xb * xb) * e
    g = ((xis * net.c_arr).sum(axis=1) - xis[:, j] * net.c[j]) / net.c[j]
    g = g[:, None]
    xs = x[None, :] * _sinc(z)
    if deriv == 0:
        return np.cos(z) - sign * 1j * g * xs
    if deriv == 1:
        return -(xb * xb) * xs - sign * 1j * g * np.cos(z)
    return -(xb * xb) * (np.cos(z) - sign * 1j * g * xs)


def eigen_pointwise(lam: complex, j, b, x, net: StarNetwork, sign: int = -1) -> np.ndarray:
    """``F^{sign, j}`` on branch ``b`` at ``x`` for equal-length index arrays.

    ``j``, ``b`` and ``x`` broadcast against each other; ``lam`` is a scalar.
    """
    j, b, x = np.broadcast_arrays(np.asarray(j), np.asarray(b), np.asarray(x, dtype=float))
    xis = xi_all(complex(lam), net)
    cx = xis * net.c_arr
    xb = xis[b]
    z = xb * x
    g = (cx.sum() - cx[j]) / net.c_arr[j]
    on_j = np.cos(z) - sign * 1j * g * x * _sinc(z)
    off_j = np.exp(sign * 1j * z)
    return np.where(j == b, on_j, off_j)


@dataclass(frozen=True)
class EigenfunctionSpec:
    """Selects ``F^{sign, j}_lam``; ``sign`` is ``+1`` or ``-1``."""

    lam: complex
    j: int
    sign: int = -1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        object.__setattr__(self, "lam", complex(self.lam))


def eval_F(spec: EigenfunctionSpec, pt: NetworkPoint, net: StarNetwork, deriv: int = 0) -> complex:
    """Value of the generalized eigenfunction at a network point."""
    _check_threshold(spec.lam, spec.j, net)
    return complex(eigen_branch(spec.lam, spec.j, pt.branch, pt.x, net, spec.sign, deriv)[0, 0])


def eigenfunction(spec: EigenfunctionSpec, net: StarNetwork) -> AnalyticFunction:
    """The generalized eigenfunction as an analytic network function.

    It is not square integrable in general, so no support or decay flag is set.
    """
    _check_threshold(spec.lam, spec.j, net)

    def make(b, d):
        return lambda x: eigen_branch(spec.lam, spec.j, b, x, net, spec.sign, d)[0]

    n = net.n
    return AnalyticFunction([make(b, 0) for b in range(n)], [make(b, 1) for b in range(n)],
                            [make(b, 2) for b in range(n)])


def ode_residual(spec: EigenfunctionSpec, b: int, x, net: StarNetwork) -> np.ndarray:
    """Pointwise ``-c_b F'' + a_b F - lam F`` on branch ``b``."""
    f0 = eigen_branch(spec.lam, spec.j, b, x, net, spec.sign, 0)[0]
    f2 = eigen_branch(spec.lam, spec.j, b, x, net, spec.sign, 2)[0]
    return -net.c[b] * f2 + net.a[b] * f0 - spec.lam * f0


def bound_M(lam: float, delta: float, net: StarNetwork) -> float:
    """Upper bound for ``|s_j(lam - i eps)|`` valid for ``0 < eps <= delta``.

    For equal potentials ``|s_j|`` is constant in ``lam`` and the exact value
    ``max_j Σ_{k≠j} sqrt(c_k / c_j)`` is returned.
    """
    c = net.c_arr
    a = net.a_arr
    if np.all(a == a[0]):
        sq = np.sqrt(c)
        return float(np.max((sq.sum() - sq) / sq))
    gap = np.abs(lam - a)
    if np.any(gap == 0.0):
        return float("inf")
    lead = np.max(1.0 / np.sqrt(c * gap))
    return float(lead * np.sum(np.sqrt(c) * ((lam - a) ** 2 + delta**2) ** 0.25))


@dataclass(frozen=True)
class KernelEnvelope:
    N: float
    gamma: float

    def __call__(self, x, xp):
        return self.N * np.exp(self.gamma * (np.asarray(x) + np.asarray(xp)))


def bound_N_gamma(lam: float, delta: float, net: StarNetwork) -> KernelEnvelope:
    """Envelope ``|K(x, x', lam - i eps)| <= N exp(gamma (x + x'))``."""
    c = net.c_arr
    a = net.a_arr
    denom = np.sqrt(np.sum(c * np.abs(lam - a)))
    M = bound_M(lam, delta, net)
    N = float("inf") if denom == 0.0 else (1.0 + M) / denom
    spread = ((a[-1] - a[0]) ** 2 + delta**2) ** 0.25
    gamma = float(np.max(1.0 / np.sqrt(c)) * max(spread, 1.0, delta))
    return KernelEnvelope(N, gamma)
