"""Spectral weights, kernel case formulas and spectral projections.

The spectral weight of component ``l`` at real ``lam`` is::

    q_l(lam) = KAPPA * c_l xi_l(lam) / |w(lam)|^2   for lam > a_l, else 0

with ``KAPPA = 1/pi`` from Stone's formula. Two independent constructions are
provided (closed form and the sampling-matrix product) together with a check
of the coefficient-matching equations that characterize the weights.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import SingularD, ThresholdSingularity
from .kernel import eigen_branch, eigen_pointwise, s_coeff, wronskian_w, xi_all
from .network import AnalyticFunction, NetworkFunction, StarNetwork
from .quadrature import threshold_rule
from .spectral_core import pair, synthesize

KAPPA = 1.0 / np.pi


def _real_nonthreshold(lam, net):
    lam = float(lam)
    if np.any(net.a_arr == lam):
        raise ThresholdSingularity(f"lambda = {lam} is a threshold")
    return lam


def sigma(lam, k: int, net: StarNetwork) -> np.ndarray:
    """Spectral weight of component ``k`` at real ``lam`` (vectorized)."""
    lam = np.asarray(lam, dtype=float)
    xis = xi_all(lam, net)
    w2 = np.abs((xis * net.c_arr).sum(axis=-1)) ** 2
    on = lam > net.a[k]
    return np.where(on, KAPPA * net.c[k] * xis[..., k].real / np.where(w2 > 0, w2, 1.0), 0.0)


def sigma_all(lam, net: StarNetwork) -> np.ndarray:
    """Weights of all components, shape ``lam.shape + (n,)``."""
    lam = np.asarray(lam, dtype=float)
    return np.stack([sigma(lam, k, net) for k in range(net.n)], axis=-1)


@dataclass(frozen=True)
class WeightMatrix:
    lam: float
    entries: np.ndarray

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.entries).real

    @property
    def off_diagonal_max(self) -> float:
        off = self.entries - np.diag(np.diag(self.entries))
        return float(np.max(np.abs(off))) if off.size else 0.0

    @property
    def rank(self) -> int:
        return int(np.count_nonzero(self.diagonal))


def weights_diagonal(lam: float, net: StarNetwork) -> WeightMatrix:
    """Closed-form diagonal weight matrix at real, non-threshold ``lam``."""
    lam = _real_nonthreshold(lam, net)
    q = np.array([float(sigma(lam, k, net)) for k in range(net.n)])
    return WeightMatrix(lam, np.diag(q).astype(complex))


@dataclass(frozen=True)
class SamplingMatrices:
    """Eigenfunction samples used by the matrix construction of the weights.

    Column ``j`` of ``D`` is ``(F^{-,l}(x_j))_l`` with ``x_j`` on branch ``j``
    (``x_0`` is the vertex). ``alpha[j]`` and ``beta[j]`` are the off- and
    on-branch values, so ``d_j = beta_j e_j + alpha_j Σ_{k≠j} e_k``.
    """

    lam: float
    x_samples: np.ndarray
    D: np.ndarray
    C: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray

    @property
    def d_vectors(self) -> list[np.ndarray]:
        return [self.D[:, j] for j in range(self.D.shape[1])]


def sampling_matrices(lam: float, x_samples, net: StarNetwork) -> SamplingMatrices:
    """Build ``D`` and ``C`` from sample points on branches ``1..n-1``."""
    lam = _real_nonthreshold(lam, net)
    n = net.n
    xs = np.asarray(x_samples, dtype=float)
    if xs.shape != (n - 1,):
        raise ValueError(f"need {n - 1} sample points, got shape {xs.shape}")
    if np.any(xs <= 0):
        raise SingularD("sample points must be off the vertex")
    pts = np.concatenate([[0.0], xs])
    br = np.arange(n)
    # D[l, j] = F^{-,l} on branch j at pts[j]
    D = eigen_pointwise(lam, br[:, None], br[None, :], pts[None, :], net, -1)
    alpha = np.array([D[(j + 1) % n, j] for j in range(n)])
    beta = np.diag(D).copy()
    alpha[0] = beta[0] = 1.0
    C = np.diag(1j * alpha)
    return SamplingMatrices(lam, xs, D, C, alpha, beta)


def weights_matrix(lam: float, x_samples, net: StarNetwork, cond_max: float = 1e12) -> WeightMatrix:
    """Weights from sampled eigenfunctions: ``(D^T)^{-1} Im((-i/w) C D) conj(D)^{-1}``.

    Raises
    ------
    SingularD
        If ``D`` is numerically singular.
    """
    S = sampling_matrices(lam, x_samples, net)
    if not np.isfinite(np.linalg.cond(S.D)) or np.linalg.cond(S.D) > cond_max:
        raise SingularD(f"sampling matrix is singular at lambda = {lam}")
    w = wronskian_w(S.lam, -1, net)
    M = (-1j / w) * (S.C @ S.D)
    rhs = M.imag
    left = np.linalg.solve(S.D.T, rhs)
    q = np.linalg.solve(np.conj(S.D).T, left.T).T
    return WeightMatrix(S.lam, KAPPA * q)


def case_label(j: int, k: int, p: int) -> str:
    """Which closed form applies for ``x`` on branch ``j``, ``x'`` on ``k``.

    Branch ``m`` propagates at band index ``p`` iff ``m < p``.
    """
    pj, pk = j < p, k < p
    if not pj and not pk:
        return "a"
    if pj and pk:
        return "b_diag" if j == k else "b"
    return "c" if pj else "d"


def im_kernel_direct(j: int, k: int, x, xp, lam: float, net: StarNetwork) -> np.ndarray:
    """``Im[(1/w) F^{-,j+1}|_{N_j}(x) F^{-,j}|_{N_k}(x')]`` by direct evaluation."""
    w = wronskian_w(lam, -1, net)
    e2 = eigen_pointwise(lam, (j + 1) % net.n, j, x, net, -1)
    fj = eigen_pointwise(lam, j, k, xp, net, -1)
    return np.imag(e2 * fj / w)


def im_kernel_case(j: int, k: int, p: int | None, x, xp, lam: float, net: StarNetwork) -> np.ndarray:
    """Closed-form imaginary part of the cyclic kernel on a real band.

    ``p`` defaults to the band index of ``lam``. Branches with index below
    ``p`` oscillate; the others decay at rate ``xi' = i xi``.
    """
    lam = _real_nonthreshold(lam, net)
    if p is None:
        p = net.band_index(lam)
    elif p != net.band_index(lam):
        raise ValueError(f"lambda = {lam} is not in band {p}")
    x = np.asarray(x, dtype=float)
    xp = np.asarray(xp, dtype=float)
    xis = xi_all(lam, net)
    w = wronskian_w(lam, -1, net)
    inv = 1.0 / w
    im_inv, re_inv = inv.imag, inv.real
    im_inv_i = (1.0 / (1j * w)).imag
    label = case_label(j, k, p)
    if label == "a":
        rj, rk = (1j * xis[j]).real, (1j * xis[k]).real
        return im_inv * np.exp(-rj * x - rk * xp)
    if label in ("b", "b_diag"):
        zj, zk = xis[j].real * x, xis[k].real * xp
        cj, sj, ck, sk = np.cos(zj), np.sin(zj), np.cos(zk), np.sin(zk)
        ss_coeff = im_inv if label == "b" else (s_coeff(lam, j, net) * inv).imag
        return im_inv * cj * ck - ss_coeff * sj * sk - re_inv * cj * sk - re_inv * sj * ck
    if label == "c":
        decay = np.exp(-(1j * xis[k]).real * xp)
        z = xis[j].real * x
        return im_inv * decay * np.cos(z) + im_inv_i * decay * np.sin(z)
    decay = np.exp(-(1j * xis[j]).real * x)
    z = xis[k].real * xp
    return im_inv * decay * np.cos(z) + im_inv_i * decay * np.sin(z)


@dataclass
class WeightSystemReport:
    lam: float
    band: int
    residuals: dict = field(default_factory=dict)

    @property
    def max_residual(self) -> float:
        return max((float(np.max(np.abs(r))) for r in self.residuals.values()), default=0.0)


def _system_residuals(q, j, k, p, lam, net, w):
    """Coefficient-matching equations for the pair of branches ``(j, k)``."""
    n = net.n
    not_j = np.arange(n) != j
    not_k = np.arange(n) != k
    T = q[np.ix_(not_j, not_k)].sum()
    Qc = q[not_j, k].sum()
    Qr = q[j, not_k].sum()
    qjk = q[j, k]
    inv = 1.0 / w
    im_inv = inv.imag
    im_inv_i = (1.0 / (1j * w)).imag
    label = case_label(j, k, p)
    if label == "a":
        return np.array([qjk, Qc, Qr, T - im_inv])
    if label == "b":
        sj = s_coeff(lam, j, net)
        skb = np.conj(s_coeff(lam, k, net))
        return np.array([
            T + Qc + Qr + qjk - im_inv,
            T + skb * Qc + sj * Qr + sj * skb * qjk + im_inv,
            T + skb * Qc + Qr + skb * qjk + 1j * im_inv_i,
            T + Qc + sj * Qr + sj * qjk - 1j * im_inv_i,
        ])
    if label == "b_diag":
        s = s_coeff(lam, j, net)
        sb = np.conj(s)
        return np.array([
            T + Qc + Qr + qjk - im_inv,
            T + sb * Qc + s * Qr + s * sb * qjk + (s * inv).imag,
            1j * (T + sb * Qc + Qr + sb * qjk) + (s * inv).real,
            -1j * (T + Qc + s * Qr + s * qjk) + inv.real,
        ])
    if label == "c":
        sj = s_coeff(lam, j, net)
        return np.array([qjk, Qc, T + Qr - im_inv, T + sj * Qr - 1j * im_inv_i])
    skb = np.conj(s_coeff(lam, k, net))
    return np.array([qjk, Qr, T + Qc - im_inv, T + skb * Qc + 1j * im_inv_i])


def verify_weight_systems(lam: float, net: StarNetwork) -> WeightSystemReport:
    """Substitute the closed-form weights into the coefficient equations.

    The equations come from expanding both sides of
    ``Im[(1/w) F^{j+1}_j(x) F^j_k(x')] = Σ q_lm F^l_j(x) conj(F^m_k(x'))``
    in the functions ``cos, sin, exp(±xi' x)`` and matching coefficients. The
    weights enter without the Stone factor, as in that identity.
    """
    lam = _real_nonthreshold(lam, net)
    p = net.band_index(lam)
    q = weights_diagonal(lam, net).entries / KAPPA
    w = wronskian_w(lam, -1, net)
    rep = WeightSystemReport(lam, p)
    for j in range(net.n):
        for k in range(net.n):
            rep.residuals[(j, k)] = _system_residuals(q, j, k, p, lam, net, w)
    return rep


def kernel_identity_residual(lam: float, j: int, k: int, x, xp, net: StarNetwork) -> np.ndarray:
    """Pointwise defect of the weight identity at ``(x on j, x' on k)`` with closed-form weights."""
    lam = _real_nonthreshold(lam, net)
    q = np.diag(weights_diagonal(lam, net).entries).real / KAPPA
    x = np.asarray(x, dtype=float)
    xp = np.asarray(xp, dtype=float)
    rhs = 0j
    for m in range(net.n):
        if q[m] == 0:
            continue
        rhs = rhs + q[m] * eigen_pointwise(lam, m, j, x, net, -1) * \
            np.conj(eigen_pointwise(lam, m, k, xp, net, -1))
    return im_kernel_direct(j, k, x, xp, lam, net) - rhs


def window_rule(a: float, b: float, net: StarNetwork, phase_rate: float, order: int = 20):
    """λ-quadrature on ``(max(a, a_1), b)`` split at every threshold."""
    lo = max(float(a), net.a[0])
    if not b > lo:
        return np.empty(0), np.empty(0)
    return threshold_rule(lo, float(b), net.a, phase_rate, order)


def projection_E(a: float, b: float, f: NetworkFunction, net: StarNetwork,
                 formula: str = "symmetric", *, x_max: float | None = None,
                 order: int = 20, panel: float = 0.25,
                 rule: tuple | None = None) -> AnalyticFunction:
    """Spectral projection of ``f`` onto the window ``(a, b)``.

    Parameters
    ----------
    formula : {"symmetric", "cyclic"}
        ``symmetric`` integrates ``Σ_l q_l F^l(x) (Vf)_l``. ``cyclic``
        integrates ``KAPPA Im[(1/w) F^{j+1}_j(x) F^j(x')]`` against ``f``
        for ``x`` on branch ``j``.
    x_max : float, optional
        Largest output coordinate the λ-grid must resolve; also used as the
        support radius of the returned function. Defaults to the support
        radius of ``f`` plus 10.
    rule : (nodes, weights), optional
        Explicit λ-quadrature, overriding the automatic one.

    Returns
    -------
    AnalyticFunction
        Lazy rules for the value and first two derivatives, truncated to
        ``[0, x_max]``.
    """
    if formula not in ("symmetric", "cyclic"):
        raise ValueError("formula must be 'symmetric' or 'cyclic'")
    if not f.compact:
        raise ValueError("projection_E needs a compactly supported function")
    if not a < b:
        raise ValueError("need a < b")
    n = net.n
    r_f = f.support_radius
    if x_max is None:
        x_max = r_f + 10.0
    if rule is None:
        rate = (r_f + x_max) / np.sqrt(net.c_arr.min()) + 1.0
        lam, wl = window_rule(a, b, net, rate, order)
    else:
        lam, wl = (np.asarray(v, dtype=float) for v in rule)
    if lam.size == 0:
        return AnalyticFunction.zero(n)

    if formula == "symmetric":
        coeffs = np.zeros((n, lam.size), dtype=complex)
        for m in range(n):
            on = lam > net.a[m]
            coeffs[m, on] = wl[on] * sigma(lam[on], m, net) * pair(f, lam[on], m, net, panel=panel)

        def make(bb, d):
            return lambda x: synthesize(lam, coeffs, bb, x, net, d)
    else:
        w = wronskian_w(lam, -1, net)
        fr = _part(f, np.real)
        fi = _part(f, np.imag)
        # A[j] = ∫ F^j f_re and ∫ F^j f_im without conjugation
        Ar = np.array([pair(fr, lam, m, net, conj=False, panel=panel) for m in range(n)])
        Ai = np.array([pair(fi, lam, m, net, conj=False, panel=panel) for m in range(n)])

        def make(j, d):
            cr, ci = Ar[j] / w, Ai[j] / w

            def rule_j(x):
                x = np.asarray(x, dtype=float)
                out = np.empty(x.shape, dtype=complex)
                flat = x.ravel()
                res = out.reshape(-1)
                step = max(1, 2_000_000 // lam.size)
                for s in range(0, flat.size, step):
                    e2 = eigen_branch(lam, (j + 1) % n, j, flat[s:s + step], net, -1, d)
                    re = wl @ (e2 * cr[:, None]).imag
                    im = wl @ (e2 * ci[:, None]).imag
                    res[s:s + step] = KAPPA * (re + 1j * im)
                return out
            return rule_j

    rules = [make(bb, 0) for bb in range(n)]
    d1 = [make(bb, 1) for bb in range(n)]
    d2 = [make(bb, 2) for bb in range(n)]
    return AnalyticFunction(rules, d1, d2, support=x_max)


def _part(f: NetworkFunction, op: Callable) -> AnalyticFunction:
    rules = [None if f.interval(k) is None else (lambda x, k=k: op(f(k, x)))
             for k in range(f.n)]
    return AnalyticFunction(rules, support=[f.interval(k) for k in range(f.n)])
