"""Finite-difference model of the star operator on branches truncated at ``x = L``.

Unknowns: one shared vertex value, then ``N - 1`` interior nodes per branch
(``N = L/h``); the node at ``x = L`` carries a homogeneous Dirichlet condition.
The stiffness form is ``Σ_k c_k Σ (u_{i+1} - u_i)²/h`` plus the potential
term, with a lumped mass of ``h`` per interior node and ``n h / 2`` at the
vertex. The symmetric operator is ``M^{-1/2} K M^{-1/2}``; for two equal
branches it reduces to the standard three-point Laplacian on a line.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.special import ndtr

from .errors import BadGrid, BoundaryContamination, SingularSystem
from .network import GridFunction, NetworkFunction, StarNetwork

# dense eigh needs two size² float64 arrays; keep them near 0.5 GB each
DENSE_LIMIT = 8_000


class DiscreteStarOperator:
    """Assembled finite-difference operator; see :func:`assemble`."""

    def __init__(self, net: StarNetwork, L: float, h: float, steps: int,
                 stiffness: sp.csr_matrix, mass: np.ndarray):
        self.net = net
        self.L = float(L)
        self.h = float(h)
        self.steps = steps
        self.stiffness = stiffness
        self.mass = mass
        # scale by the product d_i d_j so entries (i, j) and (j, i) round identically
        d = 1.0 / np.sqrt(mass)
        coo = stiffness.tocoo()
        self.matrix = sp.csr_matrix((coo.data * (d[coo.row] * d[coo.col]), (coo.row, coo.col)),
                                    shape=stiffness.shape)
        self._eig = None
        self._modes = None

    @property
    def size(self) -> int:
        return self.mass.size

    def dof(self, k: int) -> np.ndarray:
        """Indices of the unknowns on branch ``k``, vertex first."""
        m = self.steps - 1
        return np.concatenate([[0], 1 + k * m + np.arange(m)])

    def coords(self) -> np.ndarray:
        """Coordinates ``0, h, ..., L - h`` matching :meth:`dof`."""
        return self.h * np.arange(self.steps)

    def sample(self, f: NetworkFunction) -> np.ndarray:
        """Nodal values of ``f``; the vertex value is the branch average."""
        x = self.coords()
        vec = np.zeros(self.size, dtype=complex)
        vertex = 0j
        for k in range(self.net.n):
            vals = f(k, x)
            vec[self.dof(k)[1:]] = vals[1:]
            vertex += vals[0]
        vec[0] = vertex / self.net.n
        return vec

    def to_function(self, vec: np.ndarray) -> GridFunction:
        samples = []
        for k in range(self.net.n):
            s = np.zeros(self.steps + 1, dtype=complex)
            s[:-1] = vec[self.dof(k)]
            samples.append(s)
        return GridFunction([self.h] * self.net.n, [self.L] * self.net.n, samples)

    def norm(self, vec: np.ndarray) -> float:
        return float(np.sqrt(np.sum(self.mass * np.abs(vec) ** 2)))

    def eigensystem(self):
        """Dense eigenpairs of the symmetric matrix (cached)."""
        if self._eig is None:
            if self.size > DENSE_LIMIT:
                raise MemoryError(f"{self.size} unknowns exceed the dense limit {DENSE_LIMIT}")
            self._eig = sla.eigh(self.matrix.toarray())
        return self._eig

    def lowest_eigenpairs(self, cutoff: float):
        """All eigenpairs below ``cutoff`` by shift-invert Lanczos.

        The number requested starts from a Weyl-law estimate and doubles
        until the largest computed eigenvalue passes ``cutoff``.
        """
        net, L = self.net, self.L
        est = sum(L / np.pi * np.sqrt(max(cutoff - a, 0.0) / c) for a, c in zip(net.a, net.c))
        k = int(1.25 * est) + 20
        shift = net.a[0] - 1.0
        while True:
            k = min(k, self.size - 2)
            vals, vecs = spla.eigsh(self.matrix, k=k, sigma=shift, which="LM")
            order = np.argsort(vals)
            vals, vecs = vals[order], vecs[:, order]
            if vals[-1] >= cutoff or k >= self.size - 2:
                keep = vals < cutoff
                return vals[keep], vecs[:, keep]
            k *= 2


def assemble(net: StarNetwork, L: float, h: float) -> DiscreteStarOperator:
    """Assemble the truncated-star operator.

    Raises
    ------
    BadGrid
        Unless ``L/h`` is an integer of at least 4.
    """
    ratio = L / h
    steps = int(round(ratio))
    if h <= 0 or abs(ratio - steps) > 1e-9 * max(1.0, ratio) or steps < 4:
        raise BadGrid(f"L/h = {ratio} must be an integer >= 4")
    n = net.n
    m = steps - 1
    size = 1 + n * m
    rows, cols, vals = [], [], []
    mass = np.empty(size)
    mass[0] = n * h / 2.0
    diag = np.zeros(size)
    diag[0] = sum(net.a) * h / 2.0
    for k in range(n):
        c, a = net.c[k], net.a[k]
        idx = np.concatenate([[0], 1 + k * m + np.arange(m)])
        mass[idx[1:]] = h
        diag[idx[1:]] += a * h
        # edges (i, i+1) for i = 0..m-1 inside, plus the Dirichlet edge (m, L)
        left, right = idx[:-1], idx[1:]
        g = c / h
        np.add.at(diag, left, g)
        np.add.at(diag, right, g)
        rows += [left, right]
        cols += [right, left]
        vals += [np.full(m, -g), np.full(m, -g)]
        diag[idx[-1]] += g
    rows.append(np.arange(size))
    cols.append(np.arange(size))
    vals.append(diag)
    K = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(size, size))
    K.sum_duplicates()
    return DiscreteStarOperator(net, L, h, steps, K, mass)


@dataclass(frozen=True)
class ResolventSolution:
    vector: np.ndarray
    function: GridFunction
    relative_residual: float


def oracle_resolvent(op: DiscreteStarOperator, f, lam: complex) -> ResolventSolution:
    """Solve ``(lam I - S) u = f`` with ``S`` the symmetric model operator.

    ``f`` may be a network function (sampled at the nodes) or a nodal vector.
    The residual is reported relative to ``‖f‖`` in the discrete norm.
    """
    fv = op.sample(f) if isinstance(f, NetworkFunction) else np.asarray(f, dtype=complex)
    if not np.any(fv):
        z = np.zeros(op.size, dtype=complex)
        return ResolventSolution(z, op.to_function(z), 0.0)
    # (lam M - K) u = M f is the same system scaled by M^{1/2}
    A = (complex(lam) * sp.diags(op.mass) - op.stiffness).tocsc()
    try:
        u = spla.spsolve(A, op.mass * fv)
    except RuntimeError as exc:
        raise SingularSystem(str(exc)) from exc
    if not np.all(np.isfinite(u)):
        raise SingularSystem(f"solve at lambda = {lam} produced non-finite values")
    res = complex(lam) * u - (op.stiffness @ u) / op.mass - fv
    rel = op.norm(res) / op.norm(fv)
    return ResolventSolution(u, op.to_function(u), float(rel))


class DiscreteSpectralDensity:
    """``lam ↦ Σ_m |<phi_m, f>|² g_s(lam - mu_m)`` with a Gaussian ``g_s`` of width ``s``."""

    def __init__(self, eigenvalues: np.ndarray, weights: np.ndarray, smoothing: float, total: float):
        self.eigenvalues = eigenvalues
        self.weights = weights
        self.smoothing = float(smoothing)
        self.norm_squared = float(total)

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=float)
        z = (lam[..., None] - self.eigenvalues) / self.smoothing
        return (np.exp(-0.5 * z * z) @ self.weights) / (self.smoothing * np.sqrt(2 * np.pi))

    def integral(self, a: float, b: float) -> float:
        """Exact integral of the mollified density over ``(a, b)``."""
        s = self.smoothing
        return float(np.sum(self.weights * (ndtr((b - self.eigenvalues) / s) -
                                            ndtr((a - self.eigenvalues) / s))))

    @property
    def captured(self) -> float:
        return float(self.weights.sum())


def oracle_spectral_density(op: DiscreteStarOperator, f, smoothing: float,
                            cutoff: float | None = None) -> DiscreteSpectralDensity:
    """Mollified spectral density of ``f`` for the model operator.

    Without ``cutoff`` all modes are used (dense solver). With ``cutoff`` only
    modes below ``cutoff + 8 smoothing`` are computed by shift-invert Lanczos,
    which is what makes large grids affordable.
    """
    fv = op.sample(f) if isinstance(f, NetworkFunction) else np.asarray(f, dtype=complex)
    g = np.sqrt(op.mass) * fv
    if cutoff is None:
        vals, vecs = op.eigensystem()
    else:
        vals, vecs = op.lowest_eigenpairs(cutoff + 8.0 * smoothing)
    weights = np.abs(vecs.T @ g) ** 2
    return DiscreteSpectralDensity(vals, weights, smoothing, float(np.vdot(g, g).real))


@dataclass(frozen=True)
class DiscreteWaveState:
    u: GridFunction
    v: GridFunction
    t: float
    energy: float
    u_vector: np.ndarray
    v_vector: np.ndarray


def _energy(op, U, W):
    g = np.sqrt(op.mass)
    a = U * g
    b = W * g
    return float(np.vdot(b, b).real + np.vdot(a, op.matrix @ a).real)


def _spanning_modes(op, vectors, tol, max_modes=3000):
    """Lowest eigenpairs whose span holds all but ``tol`` of each vector's norm."""
    def missing(vecs):
        return max(np.linalg.norm(v - vecs @ (vecs.T @ v)) / max(np.linalg.norm(v), 1e-300)
                   for v in vectors)

    if op._modes is not None and missing(op._modes[1]) <= tol:
        return op._modes
    cutoff = op.net.a[-1] + 100.0
    while True:
        vals, vecs = op.lowest_eigenpairs(cutoff)
        miss = missing(vecs)
        if miss <= tol:
            op._modes = (vals, vecs)
            return vals, vecs
        if vals.size >= max_modes:
            raise SingularSystem(f"{vals.size} modes below {cutoff:g} still miss {miss:.2e} of the data")
        cutoff = op.net.a[0] + 2.0 * (cutoff - op.net.a[0])


def oracle_evolve(op: DiscreteStarOperator, u0, v0, t: float, tol: float = 1e-10) -> DiscreteWaveState:
    """Exact propagation of the semi-discrete wave equation in the eigenbasis.

    Up to ``DENSE_LIMIT`` unknowns all modes are used. Larger operators keep
    only the lowest modes, enough to represent the initial data to relative
    accuracy ``tol``.

    Raises
    ------
    BoundaryContamination
        If ``radius + |t| max √c_k`` reaches the truncation length.
    """
    radius = 0.0
    for f in (u0, v0):
        if isinstance(f, NetworkFunction):
            radius = max(radius, f.support_radius)
        else:
            radius = op.L
    reach = radius + abs(t) * np.sqrt(op.net.c_arr.max())
    if reach >= op.L:
        raise BoundaryContamination(
            f"signal reaches x = {reach:.3g} >= L = {op.L} by t = {t}")
    U0 = op.sample(u0) if isinstance(u0, NetworkFunction) else np.asarray(u0, dtype=complex)
    V0 = op.sample(v0) if isinstance(v0, NetworkFunction) else np.asarray(v0, dtype=complex)
    g = np.sqrt(op.mass)
    if op.size <= DENSE_LIMIT:
        vals, vecs = op.eigensystem()
    else:
        vals, vecs = _spanning_modes(op, [g * U0, g * V0], tol)
    cu = vecs.T @ (g * U0)
    cv = vecs.T @ (g * V0)
    root = np.sqrt(vals.astype(complex))
    z = root * t
    sinc = np.where(np.abs(z) < 1e-8, 1.0 - z * z / 6.0, np.sin(z) / np.where(z == 0, 1.0, z))
    cu_t = np.cos(z) * cu + t * sinc * cv
    cv_t = -vals * t * sinc * cu + np.cos(z) * cv
    U = (vecs @ cu_t) / g
    W = (vecs @ cv_t) / g
    return DiscreteWaveState(op.to_function(U), op.to_function(W), float(t), _energy(op, U, W), U, W)
