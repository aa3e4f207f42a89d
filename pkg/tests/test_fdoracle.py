import numpy as np
import pytest

from star_kg import AnalyticFunction, StarNetwork, apply_resolvent, assemble, functions
from star_kg.errors import BadGrid, BoundaryContamination
from star_kg.fdoracle import oracle_evolve, oracle_resolvent, oracle_spectral_density


def test_two_equal_branches_give_line_laplacian(line):
    L, h = 1.0, 0.125
    op = assemble(line, L, h)
    S = op.matrix.toarray()
    # order the unknowns along the line y = -L + h, ..., L - h
    order = np.concatenate([op.dof(1)[1:][::-1], [0], op.dof(0)[1:]])
    S = S[np.ix_(order, order)]
    m = S.shape[0]
    lap = (2 * np.eye(m) - np.eye(m, k=1) - np.eye(m, k=-1)) / h**2
    assert np.max(np.abs(S - lap)) < 1e-12


def test_symmetry_and_lower_bound(net3):
    h = 0.05
    op = assemble(net3, 10.0, h)
    M = op.matrix
    assert abs(M - M.T).max() == 0
    vals, _ = op.eigensystem()
    assert vals[0] >= net3.a[0] - 10 * h


def test_bad_grid(net3):
    with pytest.raises(BadGrid):
        assemble(net3, 1.0, 0.3)
    with pytest.raises(BadGrid):
        assemble(net3, 1.0, 0.5)


def test_resolvent_zero_and_residual(net3, bump3):
    op = assemble(net3, 30.0, 1e-2)
    z = oracle_resolvent(op, AnalyticFunction.zero(3), 1 + 1j)
    assert not np.any(z.vector)
    sol = oracle_resolvent(op, bump3, net3.a[0] + 1 + 1j)
    assert sol.relative_residual < 1e-10


def test_convergence_order(net3, bump3):
    lam = net3.a[0] + 1 + 1j
    R = apply_resolvent(bump3, lam, net3)
    errs = []
    for h in (0.02, 0.01, 0.005):
        op = assemble(net3, 30.0, h)
        sol = oracle_resolvent(op, bump3, lam)
        x = op.coords()
        inner = x < 15
        num = sum(np.sum(np.abs(sol.vector[op.dof(k)][inner] - R(k, x[inner])) ** 2) for k in range(3))
        den = sum(np.sum(np.abs(R(k, x[inner])) ** 2) for k in range(3))
        errs.append(np.sqrt(num / den))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 1.8), orders


def test_density_parseval(net3, bump3):
    op = assemble(net3, 20.0, 0.02)
    d = oracle_spectral_density(op, bump3, 0.2)
    assert abs(d.captured - d.norm_squared) < 1e-6 * d.norm_squared
    assert abs(d.integral(-1e3, 1e6) - d.norm_squared) < 1e-6 * d.norm_squared


def test_density_vanishes_below_orthogonal_modes(net3):
    op = assemble(net3, 10.0, 0.05)
    vals, vecs = op.eigensystem()
    lam0 = 8.0
    high = vals > lam0
    coeff = np.linspace(1.0, 2.0, high.sum())
    g = vecs[:, high] @ coeff
    f = g / np.sqrt(op.mass)  # nodal vector whose modal expansion starts above lam0
    d = oracle_spectral_density(op, f, 0.1)
    below = np.linspace(net3.a[0] - 1, lam0 - 1.0, 50)
    assert np.max(d(below)) < 1e-10 * d.norm_squared


def test_evolve_initial_time_and_energy(net3):
    op = assemble(net3, 25.0, 0.05)
    u0 = functions.gaussian(3, 5.0, 0.5, branches=[0])
    v0 = functions.gaussian(3, 6.0, 0.6, branches=[1], amplitude=0.5)
    s0 = oracle_evolve(op, u0, v0, 0.0)
    assert np.max(np.abs(s0.u_vector - op.sample(u0))) < 1e-12
    for t in (2.0, 5.0, 8.0):
        st = oracle_evolve(op, u0, v0, t)
        assert abs(st.energy - s0.energy) < 1e-10 * s0.energy


def test_boundary_contamination(net3):
    op = assemble(net3, 10.0, 0.05)
    u0 = functions.gaussian(3, 5.0, 0.5, branches=[0])
    with pytest.raises(BoundaryContamination):
        oracle_evolve(op, u0, AnalyticFunction.zero(3), 3.0)


def test_sparse_mode_route_matches_dense(monkeypatch):
    import star_kg.fdoracle as fdo
    net = StarNetwork([1.0, 1.0, 1.0], [0.0, 1.0, 2.0])
    u0 = functions.gaussian(3, 5.0, 0.5, branches=[0])
    v0 = AnalyticFunction.zero(3)
    dense = oracle_evolve(assemble(net, 20.0, 0.02), u0, v0, 4.0)
    monkeypatch.setattr(fdo, "DENSE_LIMIT", 100)
    sparse = oracle_evolve(assemble(net, 20.0, 0.02), u0, v0, 4.0)
    assert np.max(np.abs(dense.u_vector - sparse.u_vector)) < 1e-8
