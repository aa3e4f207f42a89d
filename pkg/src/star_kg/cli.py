"""Command-line driver: ``star-kg <command> --config <path> [--out <dir>] [--threads N]``.

Each command reads one JSON experiment file, writes CSV tables and SVG plots
into the output directory, and finishes with ``report.json`` listing every
check. The exit status is 0 when all checks pass, 1 when one fails and 2 for
configuration problems.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import checks, fdoracle, functions
from .checks import CheckResult, _below, _relative_l2
from .errors import BoundaryContamination, CheckFailure, ConfigError, NetworkError, StarGraphError
from .evolution import KleinGordonFlow, WaveState, energy, tunnel_decay_profile
from .kernel import eigen_branch, s_coeff, wronskian_w, xi_all
from .measure import projection_E, verify_weight_systems, weights_diagonal, weights_matrix
from .network import AnalyticFunction, StarNetwork, check_transmission, inner_product_H, norm_H
from .resolvent import apply_resolvent, kernel_values
from .svgplot import Figure
from .transform import (auto_grid, choose_lambda_max, norm_sigma, spectral_grid, transform_V,
                        transform_Z)

COMMANDS = ("eigen", "resolvent", "measure", "transform", "evolve", "verify")


# ---------------------------------------------------------------- config

@dataclass
class ExperimentConfig:
    network: StarNetwork
    L: float = 30.0
    h: float = 0.01
    rel_tol: float = 1e-10
    abs_tol: float = 1e-13
    lambda_max: float | None = None
    blocks: dict = field(default_factory=dict)

    def block(self, name: str) -> dict:
        b = self.blocks.get(name, {})
        if not isinstance(b, dict):
            raise ConfigError(f"'{name}' block must be an object")
        return b


def load_config(path) -> ExperimentConfig:
    """Parse and validate an experiment file.

    Raises
    ------
    ConfigError
        On a missing file, malformed JSON or an invalid network.
    """
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        raw = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: {exc}") from exc
    if not isinstance(raw, dict) or "network" not in raw:
        raise ConfigError("config needs a 'network' object with 'c' and 'a'")
    nw = raw["network"]
    try:
        net = StarNetwork(nw["c"], nw["a"])
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad network block: {exc}") from exc
    except NetworkError as exc:
        raise ConfigError(f"invalid network: {exc}") from exc
    grid = raw.get("grid", {})
    quad = raw.get("quadrature", {})
    lm = quad.get("lambda_max", "auto")
    if lm != "auto" and not isinstance(lm, (int, float)):
        raise ConfigError("quadrature.lambda_max must be 'auto' or a number")
    try:
        cfg = ExperimentConfig(net, float(grid.get("L", 30.0)), float(grid.get("h", 0.01)),
                               float(quad.get("rel_tol", 1e-10)), float(quad.get("abs_tol", 1e-13)),
                               None if lm == "auto" else float(lm),
                               {k: v for k, v in raw.items() if k in COMMANDS})
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def build_function(spec, n: int) -> AnalyticFunction:
    """Network function from a JSON description such as
    ``{"kind": "gaussian", "center": 5, "width": 0.5, "branches": [0]}``."""
    if spec is None or spec == "zero":
        return AnalyticFunction.zero(n)
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(f"function spec needs a 'kind': {spec!r}")
    kw = {k: v for k, v in spec.items() if k != "kind"}
    kind = spec["kind"]
    makers = {"gaussian": functions.gaussian, "even_gaussian": functions.even_gaussian,
              "polynomial_gaussian": functions.polynomial_gaussian, "indicator": functions.indicator}
    if kind not in makers:
        raise ConfigError(f"unknown function kind '{kind}'")
    try:
        return makers[kind](n, **kw)
    except TypeError as exc:
        raise ConfigError(f"{kind}: {exc}") from exc


def _linspace(spec, default):
    spec = default if spec is None else spec
    if isinstance(spec, dict):
        return np.linspace(float(spec["start"]), float(spec["stop"]), int(spec.get("num", 50)))
    return np.asarray(spec, dtype=float)


# ---------------------------------------------------------------- output

class Output:
    def __init__(self, root: Path):
        self.root = root
        root.mkdir(parents=True, exist_ok=True)
        self.files: list[str] = []

    def table(self, name: str, header: list[str], columns: list) -> None:
        """Write columns as CSV; complex columns become ``_re``/``_im`` pairs."""
        names, cols = [], []
        for h, c in zip(header, columns):
            c = np.asarray(c)
            if np.iscomplexobj(c):
                base, _, unit = h.partition(" ")
                names += [f"{base}_re {unit}".strip(), f"{base}_im {unit}".strip()]
                cols += [c.real, c.imag]
            else:
                names.append(h)
                cols.append(c)
        with open(self.root / name, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(names)
            for row in zip(*cols):
                w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
        self.files.append(name)

    def figure(self, name: str, fig: Figure) -> None:
        fig.save(self.root / name)
        self.files.append(name)

    def report(self, command: str, results: list[CheckResult]) -> dict:
        rep = {"command": command,
               "passed": all(r.passed for r in results),
               "checks": [r.as_dict() for r in results],
               "files": sorted(self.files)}
        with open(self.root / "report.json", "w", encoding="utf-8") as fh:
            json.dump(rep, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return rep


def _pmap(fn, items, threads):
    """Ordered parallel map; results come back in input order."""
    if threads <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------- commands

def cmd_eigen(cfg: ExperimentConfig, out: Output, threads: int) -> list[CheckResult]:
    net = cfg.network
    b = cfg.block("eigen")
    lams = _linspace(b.get("lambda"), {"start": net.a[0] - 1.0, "stop": net.a[-1] + 5.0, "num": 41})
    lams = np.array([l for l in lams if not net.is_threshold(l)])
    x = _linspace(b.get("x"), {"start": 0.0, "stop": 5.0, "num": 101})
    j = int(b.get("branch", 0))
    sign = int(b.get("sign", -1))
    if not 0 <= j < net.n or sign not in (-1, 1):
        raise ConfigError("eigen.branch must index a branch and eigen.sign must be -1 or 1")

    xis = xi_all(lams, net)
    cols = [lams] + [xis[:, k] for k in range(net.n)] + [s_coeff(lams, k, net) for k in range(net.n)]
    cols.append(wronskian_w(lams, sign, net))
    header = (["lambda [1/time^2]"] + [f"xi{k} [1/length]" for k in range(net.n)] +
              [f"s{k} [1]" for k in range(net.n)] + ["w [1/time]"])
    out.table("eigen_parameters.csv", header, cols)

    def branch_table(bb):
        F = eigen_branch(lams, j, bb, x, net, sign, 0)
        F2 = eigen_branch(lams, j, bb, x, net, sign, 2)
        res = np.abs(-net.c[bb] * F2 + (net.a[bb] - lams[:, None]) * F)
        return F, float(res.max())

    tables = _pmap(branch_table, range(net.n), threads)
    worst = max(t[1] for t in tables)
    L, X = np.meshgrid(lams, x, indexing="ij")
    for bb, (F, _) in enumerate(tables):
        out.table(f"eigen_F_branch{bb}.csv", ["lambda [1/time^2]", "x [length]", "F [1]"],
                  [L.ravel(), X.ravel(), F.ravel()])
    mid = len(lams) // 2
    fig = Figure(f"eigenfunction at lambda = {lams[mid]:.3g}", "x", "Re F")
    for bb, (F, _) in enumerate(tables):
        fig.line(x, F[mid].real, f"branch {bb}")
    out.figure("eigen_F.svg", fig)

    from .kernel import EigenfunctionSpec, eigenfunction
    t0 = t1 = 0.0
    for lam in lams:
        d = check_transmission(eigenfunction(EigenfunctionSpec(complex(lam), j, sign), net), net)
        t0, t1 = max(t0, d.t0_defect), max(t1, d.t1_defect)
    return [_below("eigen ODE residual", worst, float(b.get("ode_tol", 1e-10))),
            _below("eigen T0 defect", t0, 1e-12), _below("eigen T1 defect", t1, 1e-12)]


def cmd_resolvent(cfg: ExperimentConfig, out: Output, threads: int) -> list[CheckResult]:
    net = cfg.network
    b = cfg.block("resolvent")
    lam_in = b.get("lambda", [net.a[0] + 1.0, 1.0])
    lam = complex(*lam_in) if isinstance(lam_in, list) else complex(lam_in)
    f = build_function(b.get("f"), net.n) if "f" in b else checks.default_bump(net)
    x_max = float(b.get("x_max", cfg.L / 2))
    xs = np.linspace(0.0, x_max, int(b.get("points", 501)))
    R = apply_resolvent(f, lam, net)
    results = []
    pairs = []
    for k in range(net.n):
        lhs = lam * R(k, xs) + net.c[k] * R(k, xs, 2) - net.a[k] * R(k, xs)
        pairs.append((lhs, f(k, xs)))
    results.append(_below("resolvent residual", _relative_l2(pairs), 1e-6))
    if net.n >= 3:
        R2 = apply_resolvent(f, lam, net, partner_shift=2)
        d = max(float(np.max(np.abs(R2(k, xs) - R(k, xs)))) for k in range(net.n))
        results.append(_below("resolvent partner independence", d, 1e-8))

    slice_x = float(b.get("slice_at", 1.0))
    K = [kernel_values(lam, 0, slice_x, k, xs, net) for k in range(net.n)]
    out.table("kernel_slice.csv", ["branch [1]", "x_prime [length]", "K [time^2]"],
              [np.repeat(np.arange(net.n), xs.size), np.tile(xs, net.n), np.concatenate(K)])
    fig = Figure(f"|K(x, x', lambda)|, x = {slice_x:g} on branch 0", "x'", "|K|")
    for k in range(net.n):
        fig.line(xs, np.abs(K[k]), f"branch {k}")
    out.figure("kernel_slice.svg", fig)

    cols = [np.repeat(np.arange(net.n), xs.size), np.tile(xs, net.n),
            np.concatenate([R(k, xs) for k in range(net.n)])]
    header = ["branch [1]", "x [length]", "Rf [arb]"]
    if b.get("oracle", True):
        op = fdoracle.assemble(net, cfg.L, cfg.h)
        sol = fdoracle.oracle_resolvent(op, f, lam)
        oracle = np.concatenate([sol.function(k, xs) for k in range(net.n)])
        cols.append(oracle)
        header.append("Rf_oracle [arb]")
        x = op.coords()
        inner = x < cfg.L / 2
        cmp = [(sol.vector[op.dof(k)][inner], R(k, x[inner])) for k in range(net.n)]
        results.append(_below("resolvent vs FD oracle", _relative_l2(cmp),
                              float(b.get("oracle_tol", 5e-3)), f"h={cfg.h:g}, L={cfg.L:g}"))
    out.table("resolvent.csv", header, cols)
    fig = Figure(f"Re R(lambda) f, lambda = {lam:.3g}", "x", "Re Rf")
    for k in range(net.n):
        fig.line(xs, R(k, xs).real, f"branch {k}")
    out.figure("resolvent.svg", fig)
    return results


def cmd_measure(cfg: ExperimentConfig, out: Output, threads: int) -> list[CheckResult]:
    net = cfg.network
    b = cfg.block("measure")
    lams = _linspace(b.get("lambda"), {"start": net.a[0] + 0.05, "stop": net.a[-1] + 5.0, "num": 60})
    lams = np.array([l for l in lams if not net.is_threshold(l) and l > net.a[0]])
    rng = np.random.default_rng(int(b.get("seed", 0)))
    samples = rng.uniform(0.3, 2.0, (2, net.n - 1)) if net.n > 1 else np.zeros((2, 0))

    def one(lam):
        diag = weights_diagonal(lam, net).entries
        m1 = weights_matrix(lam, samples[0], net).entries
        m2 = weights_matrix(lam, samples[1], net).entries
        return (np.diag(diag).real, float(np.max(np.abs(m1 - diag))), float(np.max(np.abs(m1 - m2))),
                verify_weight_systems(lam, net).max_residual)

    rows = _pmap(one, lams, threads)
    q = np.array([r[0] for r in rows])
    out.table("weights.csv", ["lambda [1/time^2]"] + [f"q{k} [1]" for k in range(net.n)],
              [lams] + [q[:, k] for k in range(net.n)])
    fig = Figure("spectral weights", "lambda", "q_k")
    for k in range(net.n):
        fig.line(lams, q[:, k], f"q{k}")
    out.figure("weights.svg", fig)
    results = [_below("matrix vs diagonal weights", max(r[1] for r in rows), 1e-10),
               _below("matrix weights sample independence", max(r[2] for r in rows), 1e-10),
               _below("weight systems residual", max(r[3] for r in rows), 1e-12)]

    if "window" in b:
        a, bb = map(float, b["window"])
        f = build_function(b.get("f"), net.n) if "f" in b else checks.default_bump(net)
        x_max = float(b.get("x_max", f.support_radius + 4.0))
        Es = projection_E(a, bb, f, net, "symmetric", x_max=x_max)
        Ec = projection_E(a, bb, f, net, "cyclic", x_max=x_max)
        xs = np.linspace(0.0, x_max, 401)
        diff = _relative_l2([(Ec(k, xs), Es(k, xs)) for k in range(net.n)])
        results.append(_below("cyclic vs symmetric projection", diff, 1e-3, f"window ({a:g}, {bb:g})"))
        out.table("projection.csv", ["branch [1]", "x [length]", "Ef_symmetric [arb]", "Ef_cyclic [arb]"],
                  [np.repeat(np.arange(net.n), xs.size), np.tile(xs, net.n),
                   np.concatenate([Es(k, xs) for k in range(net.n)]),
                   np.concatenate([Ec(k, xs) for k in range(net.n)])])
    return results


def _lambda_max(cfg, f):
    if cfg.lambda_max is not None:
        return cfg.lambda_max
    return choose_lambda_max(f, cfg.network, cfg.rel_tol)


def cmd_transform(cfg: ExperimentConfig, out: Output, threads: int) -> list[CheckResult]:
    net = cfg.network
    b = cfg.block("transform")
    specs = b.get("functions")
    funcs = [build_function(s, net.n) for s in specs] if specs else checks.plancherel_family(net)
    tol = float(b.get("plancherel_tol", 1e-4))

    def one(f):
        g = spectral_grid(net, _lambda_max(cfg, f), 2 * f.support_radius)
        Vf = transform_V(f, g, net)
        nf = norm_H(f) ** 2
        back = transform_Z(Vf, net, support=f.support_radius)
        xs = np.linspace(0.0, f.support_radius, 401)
        rt = _relative_l2([(back(k, xs), f(k, xs)) for k in range(net.n)])
        return g, Vf, nf, norm_sigma(Vf, net) ** 2, rt

    rows = _pmap(one, funcs, threads)
    results = []
    for i, (g, Vf, nf, ns, rt) in enumerate(rows):
        results.append(_below(f"Plancherel f{i}", abs(nf - ns) / nf, tol,
                              f"lambda_max={g.lambda_max:g}"))
        results.append(_below(f"round trip Z(Vf) - f, f{i}", rt, float(b.get("round_trip_tol", 1e-6))))
        full = Vf.full()
        out.table(f"transform_f{i}.csv", ["lambda [1/time^2]"] + [f"Vf{k} [arb]" for k in range(net.n)],
                  [g.nodes] + [full[k] for k in range(net.n)])
        fig = Figure(f"|Vf| for f{i}", "lambda", "|Vf_k|", logy=True)
        for k in range(net.n):
            fig.line(g.nodes, np.abs(full[k]), f"k = {k}")
        out.figure(f"transform_f{i}.svg", fig)
    return results


def cmd_evolve(cfg: ExperimentConfig, out: Output, threads: int) -> list[CheckResult]:
    net = cfg.network
    b = cfg.block("evolve")
    u0 = build_function(b.get("u0"), net.n)
    v0 = build_function(b.get("v0", "zero"), net.n)
    times = _linspace(b.get("times"), [0.0, 1.0, 2.0])
    t_max = float(np.max(np.abs(times)))
    flow = KleinGordonFlow(u0, v0, net, t_max, x_out=b.get("x_max"), lambda_max=cfg.lambda_max)
    xs = np.linspace(0.0, flow.x_out, int(b.get("points", 401)))
    results = []
    states = _pmap(flow.state, list(times), threads)
    for i, st in enumerate(states):
        out.table(f"frame_{i:03d}.csv", ["branch [1]", "x [length]", "u [arb]"],
                  [np.repeat(np.arange(net.n), xs.size), np.tile(xs, net.n),
                   np.concatenate([st.u(k, xs) for k in range(net.n)])])
        fig = Figure(f"u at t = {st.t:g}", "x", "Re u")
        for k in range(net.n):
            fig.line(xs, st.u(k, xs).real, f"branch {k}")
        out.figure(f"frame_{i:03d}.svg", fig)

    if flow.conforming and b.get("energy", True):
        e0 = energy(WaveState(u0, v0, 0.0, xi_max=states[0].xi_max), net, x_max=flow.x_out)
        es = np.array([energy(s, net, x_max=flow.x_out) for s in states])
        out.table("energy.csv", ["t [time]", "energy [arb]"], [times, es])
        results.append(_below("energy drift", float(np.max(np.abs(es - e0)) / e0),
                              float(b.get("energy_tol", 1e-4))))

    if b.get("oracle", False):
        op = fdoracle.assemble(net, cfg.L, cfg.h)
        for t, st in zip(times, states):
            try:
                d = fdoracle.oracle_evolve(op, u0, v0, float(t))
            except BoundaryContamination as exc:
                results.append(CheckResult(f"evolution vs FD oracle t={t:g}", float("inf"),
                                           float(b.get("oracle_tol", 1e-2)), False,
                                           f"BoundaryContamination: {exc}"))
                continue
            x = op.coords()
            inner = x < cfg.L / 2
            cmp = [(d.u_vector[op.dof(k)][inner], st.u(k, x[inner])) for k in range(net.n)]
            results.append(_below(f"evolution vs FD oracle t={t:g}", _relative_l2(cmp),
                                  float(b.get("oracle_tol", 1e-2))))

    if "tunnel" in b:
        tb = b["tunnel"]
        fit = tunnel_decay_profile(tuple(tb["band"]), int(tb["branch"]), u0, net,
                                   t=float(tb.get("t", 0.5)))
        lo, hi = fit.predicted_rate_interval
        out.table("tunnel_fit.csv", ["x [length]", "amplitude [arb]"], [fit.xs, fit.amplitude])
        fig = Figure(f"decay on branch {fit.branch}: rate {fit.fitted_rate:.4f}", "x", "|u|", logy=True)
        fig.line(fit.xs, fit.amplitude, "|u|")
        out.figure("tunnel_fit.svg", fig)
        results.append(CheckResult("tunnel decay rate relative miss", fit.relative_miss,
                                   float(tb.get("tol", 0.05)), fit.relative_miss <= float(tb.get("tol", 0.05)),
                                   f"rate {fit.fitted_rate:.4f} vs [{lo:.4f}, {hi:.4f}]"))
    return results


VERIFY_SUITE = {
    "eigenfunctions": lambda cfg: checks.check_eigenfunctions(cfg.network),
    "wronskian": lambda cfg: checks.check_wronskian_bound(cfg.network),
    "kernel_symmetry": lambda cfg: checks.check_kernel_symmetry(cfg.network),
    "limiting_absorption": lambda cfg: checks.check_limiting_absorption_suite(cfg.network),
    "case_formulas": lambda cfg: checks.check_case_formulas(cfg.network),
    "weights": lambda cfg: checks.check_weights(cfg.network),
    "resolvent": lambda cfg: checks.check_resolvent(cfg.network, h=cfg.h, L=cfg.L),
    "plancherel": lambda cfg: checks.check_plancherel(cfg.network, fd=False),
    "diagonalization": lambda cfg: checks.check_diagonalization(),
    "dynamics": lambda cfg: checks.check_dynamics(),
    "tunnel": lambda cfg: checks.check_tunnel(),
}
QUICK = ("eigenfunctions", "wronskian", "kernel_symmetry", "limiting_absorption", "case_formulas",
         "weights", "resolvent", "plancherel")


def cmd_verify(cfg: ExperimentConfig, out: Output, threads: int) -> list[CheckResult]:
    b = cfg.block("verify")
    names = b.get("checks", list(QUICK))
    unknown = [n for n in names if n not in VERIFY_SUITE]
    if unknown:
        raise ConfigError(f"unknown checks {unknown}; choose from {sorted(VERIFY_SUITE)}")
    groups = _pmap(lambda n: VERIFY_SUITE[n](cfg), names, threads)
    results = [r for g in groups for r in g]
    out.table("verify.csv", ["check", "value [1]", "tolerance [1]", "passed"],
              [[r.name for r in results], [r.value for r in results], [r.tol for r in results],
               [int(r.passed) for r in results]])
    return results


HANDLERS = {"eigen": cmd_eigen, "resolvent": cmd_resolvent, "measure": cmd_measure,
            "transform": cmd_transform, "evolve": cmd_evolve, "verify": cmd_verify}


def run(command: str, config_path, out_dir=None, threads: int = 1) -> int:
    """Run one command; returns the process exit code."""
    try:
        if command not in HANDLERS:
            raise ConfigError(f"unknown command '{command}'")
        cfg = load_config(config_path)
        root = Path(os.environ.get("OUT_DIR") or out_dir or f"out_{command}")
        out = Output(root)
        results = HANDLERS[command](cfg, out, max(1, int(threads)))
        rep = out.report(command, results)
        for r in results:
            print(r.line())
        if not rep["passed"]:
            failed = [r.name for r in results if not r.passed]
            raise CheckFailure(f"{len(failed)} check(s) failed: {', '.join(failed)}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CheckFailure as exc:
        print(f"check failure: {exc}", file=sys.stderr)
        return 1
    except StarGraphError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="star-kg", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="JSON experiment file")
    ap.add_argument("--out", default=None, help="output directory (OUT_DIR overrides)")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args(argv)
    return run(args.command, args.config, args.out, args.threads)


if __name__ == "__main__":
    sys.exit(main())
