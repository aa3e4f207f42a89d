"""Numerical checks shared by the acceptance tests and the ``verify`` command.

Each ``check_*`` function returns a list of :class:`CheckResult`. Parameters
default to the sizes used by the acceptance suite; the CLI passes smaller ones
where a quick run is wanted.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import fdoracle, functions
from .evolution import KleinGordonFlow, WaveState, energy, tunnel_decay_profile
from .kernel import (EigenfunctionSpec, eigenfunction, ode_residual, wronskian_w)
from .measure import (im_kernel_case, im_kernel_direct, projection_E, verify_weight_systems,
                      weights_diagonal, weights_matrix, window_rule)
from .network import (AnalyticFunction, StarNetwork, apply_A, check_transmission,
                      inner_product_H, norm_H)
from .resolvent import apply_resolvent, check_limiting_absorption, diagonal_branches, kernel_values
from .network import NetworkPoint
from .transform import (auto_grid, norm_sigma, sobolev_membership, spectral_grid, transform_V)


@dataclass
class CheckResult:
    name: str
    value: float
    tol: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  {self.name}: {self.value:.3e} (tol {self.tol:.1e}) {self.detail}".rstrip()

    def as_dict(self) -> dict:
        d = asdict(self)
        d["value"] = float(d["value"])
        return d


def _below(name, value, tol, detail=""):
    value = float(value)
    return CheckResult(name, value, tol, bool(value < tol), detail)


def sample_band_points(net: StarNetwork, above: float = 3.0) -> list[float]:
    """One real point inside every non-empty band, plus one above the top threshold."""
    pts = []
    a = net.a
    for p in range(1, net.n):
        if a[p] > a[p - 1]:
            pts.append(0.5 * (a[p - 1] + a[p]))
    pts.append(a[-1] + above)
    return pts


def _random_lambda(rng, net, count):
    """Mix of real non-threshold and complex spectral parameters."""
    out = []
    lo, hi = net.a[0] - 2.0, net.a[-1] + 8.0
    while len(out) < count:
        re = rng.uniform(lo, hi)
        im = 0.0 if rng.random() < 0.4 else rng.uniform(-3.0, 3.0)
        lam = complex(re, im)
        if not net.is_threshold(lam):
            out.append(lam)
    return out


def check_eigenfunctions(net: StarNetwork, cases: int = 50, seed: int = 0,
                         points: int = 100, x_max: float = 3.0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    res = t0 = t1 = 0.0
    for lam in _random_lambda(rng, net, cases):
        spec = EigenfunctionSpec(lam, int(rng.integers(net.n)), int(rng.choice([-1, 1])))
        for b in range(net.n):
            x = rng.uniform(0.0, x_max, points)
            res = max(res, float(np.max(np.abs(ode_residual(spec, b, x, net)))))
        d = check_transmission(eigenfunction(spec, net), net)
        t0, t1 = max(t0, d.t0_defect), max(t1, d.t1_defect)
    return [_below("eigenfunction ODE residual", res, 1e-10, f"{cases} cases"),
            _below("eigenfunction T0 defect", t0, 1e-12),
            _below("eigenfunction T1 defect", t1, 1e-12)]


def check_wronskian_bound(net: StarNetwork, size: int = 100, eps_max: float = 5.0,
                          lam_span: float = 10.0) -> list[CheckResult]:
    lam = np.linspace(net.a[0], net.a[-1] + lam_span, size)
    eps = np.linspace(0.0, eps_max, size)
    L, E = np.meshgrid(lam, eps, indexing="ij")
    w = wronskian_w(L - 1j * E, -1, net)
    lower = np.sum(net.c_arr * np.abs(L[..., None] - net.a_arr), axis=-1)
    slack = np.abs(w) ** 2 - lower
    violations = int(np.sum(slack < -1e-12 * np.maximum(lower, 1.0)))
    return [CheckResult("Wronskian lower bound violations", violations, 0.5, violations == 0,
                        f"{size}x{size} grid")]


def _random_pairs(rng, net, count, x_max=3.0):
    jb = rng.integers(net.n, size=count)
    kb = rng.integers(net.n, size=count)
    x = rng.uniform(0.0, x_max, count)
    xp = rng.uniform(0.0, x_max, count)
    return jb, x, kb, xp


def check_kernel_symmetry(net: StarNetwork, queries: int = 1000, seed: int = 1) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(queries):
        lam = complex(rng.uniform(net.a[0] - 2, net.a[-1] + 8), rng.uniform(-3, 3))
        if lam.imag == 0.0:
            continue
        jb, x, kb, xp = (v[0] for v in _random_pairs(rng, net, 1))
        k1 = kernel_values(lam, jb, x, kb, xp, net)
        k2 = kernel_values(np.conj(lam), jb, x, kb, xp, net)
        worst = max(worst, float(abs(k2 - np.conj(k1))))
    diag = one_sided = 0.0
    delta = 1e-13
    for lam in _random_lambda(rng, net, 50):
        j = int(rng.integers(net.n))
        x = rng.uniform(0.1, 3.0, 20)
        a, b = diagonal_branches(lam, j, x, net)
        diag = max(diag, float(np.max(np.abs(a - b))))
        up = kernel_values(lam, j, x, j, x + delta, net)
        down = kernel_values(lam, j, x, j, x - delta, net)
        one_sided = max(one_sided, float(np.max(np.abs(up - down))))
    return [_below("kernel conjugation symmetry", worst, 1e-13, f"{queries} queries"),
            _below("kernel diagonal agreement", diag, 1e-12),
            _below("kernel one-sided limits on diagonal", one_sided, 1e-12)]


def check_limiting_absorption_suite(net: StarNetwork, samples: int = 1000, seed: int = 2,
                                    lams=None) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    lams = sample_band_points(net) if lams is None else lams
    eps = 10.0 ** -np.arange(2, 11)
    final = 0.0
    ratio = 0.0
    mono = True
    per = max(samples // len(lams), 1)
    for lam in lams:
        jb, x, kb, xp = _random_pairs(rng, net, per)
        pairs = [(NetworkPoint(j, a), NetworkPoint(k, b)) for j, a, k, b in zip(jb, x, kb, xp)]
        rep = check_limiting_absorption(lam, eps, pairs, net)
        final = max(final, rep.max_final_defect)
        ratio = max(ratio, float(rep.envelope_ratio.max()))
        mono = mono and rep.monotone
    return [_below("limiting absorption defect at eps=1e-10", final, 1e-8,
                   f"{per * len(lams)} samples"),
            CheckResult("limiting absorption monotone decrease", float(not mono), 0.5, mono),
            CheckResult("kernel envelope max ratio", ratio, 1.0, ratio <= 1.0)]


def _relative_l2(pairs):
    num = sum(np.sum(np.abs(a - b) ** 2) for a, b in pairs)
    den = sum(np.sum(np.abs(b) ** 2) for _, b in pairs)
    return float(np.sqrt(num / den))


def default_bump(net: StarNetwork, center: float = 2.5, width: float = 0.5):
    amps = np.cos(np.arange(net.n) + 0.3)
    return functions.gaussian(net.n, center, width, amplitude=amps)


def check_resolvent(net: StarNetwork, h: float = 1e-3, L: float = 30.0,
                    f=None) -> list[CheckResult]:
    f = f or default_bump(net)
    lam = net.a[0] + 1.0 + 1.0j
    R = apply_resolvent(f, lam, net)
    xs = np.linspace(0.0, L / 2, 3001)
    pairs = []
    for k in range(net.n):
        lhs = lam * R(k, xs) + net.c[k] * R(k, xs, 2) - net.a[k] * R(k, xs)
        pairs.append((lhs, f(k, xs)))
    residual = _relative_l2(pairs)
    op = fdoracle.assemble(net, L, h)
    sol = fdoracle.oracle_resolvent(op, f, lam)
    x = op.coords()
    inner = x < L / 2
    cmp = [(sol.vector[op.dof(k)][inner], R(k, x[inner])) for k in range(net.n)]
    return [_below("resolvent residual (analytic)", residual, 1e-6),
            _below("resolvent vs FD oracle (interior)", _relative_l2(cmp), 5e-3, f"h={h}, L={L}")]


def check_case_formulas(net: StarNetwork, per_band: int = 200, seed: int = 3) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    seen = set()
    from .measure import case_label
    for lam in sample_band_points(net):
        p = net.band_index(lam)
        for _ in range(per_band):
            j, k = (int(v) for v in rng.integers(net.n, size=2))
            x, xp = rng.uniform(0.0, 3.0, 2)
            seen.add(case_label(j, k, p))
            d = abs(im_kernel_case(j, k, p, x, xp, lam, net) - im_kernel_direct(j, k, x, xp, lam, net))
            worst = max(worst, float(d))
    return [_below("case formulas vs direct", worst, 1e-12, "cases " + ",".join(sorted(seen)))]


def check_weights(net: StarNetwork, seed: int = 4, per_band: int = 5, f=None,
                  projection: bool = True) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    match = indep = systems = 0.0
    lams = []
    for lam in sample_band_points(net):
        lo = max(l for l in net.a if l < lam)
        hi = min([l for l in net.a if l > lam], default=lam + 5.0)
        lams += list(rng.uniform(lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo), per_band))
    for lam in lams:
        diag = weights_diagonal(lam, net).entries
        x1 = rng.uniform(0.3, 2.0, net.n - 1)
        x2 = rng.uniform(0.3, 2.0, net.n - 1)
        m1 = weights_matrix(lam, x1, net).entries
        m2 = weights_matrix(lam, x2, net).entries
        match = max(match, float(np.max(np.abs(m1 - diag))))
        indep = max(indep, float(np.max(np.abs(m1 - m2))))
        systems = max(systems, verify_weight_systems(lam, net).max_residual)
    out = [_below("matrix vs diagonal weights", match, 1e-10),
           _below("matrix weights sample independence", indep, 1e-10),
           _below("weight systems residual", systems, 1e-12)]
    if projection:
        f = f or default_bump(net)
        a, b = net.a[0], net.a[-1] + 4.0
        x_max = f.support_radius + 4.0
        rule = window_rule(a, b, net, 2 * x_max / np.sqrt(net.c_arr.min()) + 1)
        Es = projection_E(a, b, f, net, "symmetric", x_max=x_max, rule=rule)
        Ec = projection_E(a, b, f, net, "cyclic", x_max=x_max, rule=rule)
        xs = np.linspace(0.0, x_max, 801)
        diff = _relative_l2([(Ec(k, xs), Es(k, xs)) for k in range(net.n)])
        out.append(_below("cyclic vs symmetric projection", diff, 1e-3))
    return out


def plancherel_family(net: StarNetwork) -> list:
    """Five compactly supported test functions of different shape and placement.

    All of them vanish to all orders at the vertex; a jump there would make
    ``|Vf|²`` decay slowly and force a very large spectral cutoff.
    """
    n = net.n
    return [
        functions.gaussian(n, 5.0, 0.5, branches=[0]),
        functions.gaussian(n, 4.0, 0.4, amplitude=np.linspace(1.0, -0.5, n)),
        functions.even_gaussian(n, 1.0),
        functions.polynomial_gaussian(n, 4, 0.8, amplitude=np.arange(1, n + 1)),
        functions.gaussian(n, 5.0, 0.5, branches=[n - 1], wavenumber=2.0),
    ]


def check_plancherel(net: StarNetwork, fd: bool = True, L: float = 60.0, h: float = 5e-3,
                     smoothing: float = 0.25, window=(1.5, 6.0)) -> list[CheckResult]:
    worst = 0.0
    for f in plancherel_family(net):
        # 1e-8 of the mass beyond the cutoff is far below the 1e-4 target
        g = auto_grid(f, net, tol=1e-8)
        Vf = transform_V(f, g, net)
        nf = norm_H(f) ** 2
        worst = max(worst, abs(nf - norm_sigma(Vf, net) ** 2) / nf)
    out = [_below("Plancherel relative error", worst, 1e-4, "5 functions")]
    if fd:
        f = functions.gaussian(net.n, 6.0, 0.6, amplitude=np.linspace(1.0, -0.7, net.n))
        a, b = window
        op = fdoracle.assemble(net, L, h)
        dens = fdoracle.oracle_spectral_density(op, f, smoothing, cutoff=b)
        E = projection_E(a, b, f, net, "symmetric", x_max=f.support_radius)
        exact = inner_product_H(E, f, net).real
        rel = abs(dens.integral(a, b) - exact) / exact
        out.append(_below("FD spectral density vs ||E(a,b)f||^2", rel, 2e-2,
                          f"(a,b)=({a:g},{b:g}), L={L:g}, h={h:g}"))
    return out


def domain_network() -> StarNetwork:
    """Three branches with ``2 c_k + a_k`` constant, so even Gaussians lie in D(A²)."""
    return StarNetwork([2.0, 1.0, 0.5], [0.0, 2.0, 3.0])


def check_diagonalization(net: StarNetwork | None = None) -> list[CheckResult]:
    net = net or domain_network()
    f = functions.even_gaussian(net.n, 1.0)
    Af = apply_A(f, net)
    g = spectral_grid(net, net.a[-1] + 200.0, f.support_radius)
    Vf = transform_V(f, g, net)
    VAf = transform_V(Af, g, net)
    lamVf = Vf.multiply(lambda lam: lam)
    num = max(float(np.max(np.abs(a - b))) for a, b in zip(VAf.components, lamVf.components))
    den = max(float(np.max(np.abs(b))) for b in lamVf.components)
    sob = sobolev_membership(f, 1, net)
    nAf = norm_H(Af)
    return [_below("V(Af) vs lam Vf (sup relative)", num / den, 1e-6),
            _below("|lam Vf|_sigma vs ||Af||", abs(sob.norm_j - nAf) / nAf, 1e-3,
                   f"finite={sob.finite}")]


def _dalembert(center, width, t):
    g = lambda s: np.exp(-0.5 * ((s - center) / width) ** 2)
    return lambda y: 0.5 * (g(y - t) + g(y + t))


def check_dynamics(t_dal: float = 5.0, t_max: float = 10.0, fd_h: float = 0.02,
                   fd_L: float = 25.0) -> list[CheckResult]:
    out = []
    # two equal branches form a line; branch 0 is y > 0 and branch 1 is y < 0
    line = StarNetwork([1.0, 1.0], [0.0, 0.0])
    u0 = functions.gaussian(2, 8.0, 0.6, branches=[0])
    flow = KleinGordonFlow(u0, AnalyticFunction.zero(2), line, t_dal)
    st = flow.state(t_dal)
    exact = _dalembert(8.0, 0.6, t_dal)
    xs = np.linspace(0.0, 20.0, 2001)
    err = max(np.max(np.abs(st.u(0, xs) - exact(xs))), np.max(np.abs(st.u(1, xs) - exact(-xs))))
    out.append(_below("d'Alembert sup error at t=5", err, 1e-2))

    net = StarNetwork([1.0, 1.0, 1.0], [0.0, 1.0, 2.0])
    u0 = functions.gaussian(3, 5.0, 0.5, branches=[0])
    v0 = functions.gaussian(3, 6.0, 0.6, branches=[1], amplitude=0.5)
    flow = KleinGordonFlow(u0, v0, net, t_max)
    e0 = energy(WaveState(u0, v0, 0.0, xi_max=flow.state(0.0).xi_max), net, x_max=flow.x_out)
    drift = 0.0
    for t in np.linspace(0.0, t_max, 5):
        drift = max(drift, abs(energy(flow.state(t), net, x_max=flow.x_out) - e0) / e0)
    out.append(_below("energy drift over [0,10]", drift, 1e-4))

    op = fdoracle.assemble(net, fd_L, fd_h)
    d = fdoracle.oracle_evolve(op, u0, v0, t_max)
    st = flow.state(t_max)
    x = op.coords()
    inner = x < fd_L / 2
    cmp = [(d.u_vector[op.dof(k)][inner], st.u(k, x[inner])) for k in range(net.n)]
    out.append(_below("evolution vs FD oracle (interior)", _relative_l2(cmp), 1e-2,
                      f"t={t_max:g}, h={fd_h:g}"))
    return out


def check_tunnel(net: StarNetwork | None = None, band=(1.0, 3.0), k: int = 2) -> list[CheckResult]:
    net = net or StarNetwork([1.0, 1.0, 1.0], [0.0, 4.0, 16.0])
    u0 = functions.gaussian(net.n, 1.5, 0.4, branches=[0])
    fit = tunnel_decay_profile(band, k, u0, net)
    lo, hi = fit.predicted_rate_interval
    return [CheckResult("tunnel decay rate relative miss", fit.relative_miss, 0.05,
                        fit.relative_miss <= 0.05,
                        f"rate {fit.fitted_rate:.4f} vs [{lo:.4f}, {hi:.4f}]")]
